use std::collections::{BTreeMap, BTreeSet};

use super::{Elem, History, ModelError, Query, Structure, UpdateSet};

/// A bijective renaming of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bijection {
    map: BTreeMap<Elem, Elem>,
}

impl Bijection {
    pub fn new(map: BTreeMap<Elem, Elem>) -> Result<Self, ModelError> {
        let image: BTreeSet<&Elem> = map.values().collect();
        if image.len() != map.len() {
            return Err(ModelError::NotABijection("two elements share an image".into()));
        }
        Ok(Bijection { map })
    }

    pub fn identity<'a>(elems: impl IntoIterator<Item = &'a Elem>) -> Self {
        Bijection {
            map: elems.into_iter().map(|e| (e.clone(), e.clone())).collect(),
        }
    }

    pub fn inverse(&self) -> Bijection {
        Bijection {
            map: self.map.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        }
    }

    pub fn get(&self, e: &Elem) -> Result<Elem, ModelError> {
        self.map
            .get(e)
            .cloned()
            .ok_or_else(|| ModelError::NotABijection(format!("{e} is not in the domain")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Elem, &Elem)> {
        self.map.iter()
    }
}

/// Objects that can be transported along a bijection.
pub trait Rename: Sized {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError>;
}

impl Rename for Elem {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        iso.get(self)
    }
}

impl Rename for Query {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.map_elems(|e| iso.get(e))
    }
}

impl Rename for History {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.map_elems(|e| iso.get(e))
    }
}

impl Rename for UpdateSet {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.map_elems(|e| iso.get(e))
    }
}

impl Rename for Structure {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.map_elems(|e| iso.get(e))
    }
}

impl<T: Rename + Ord> Rename for BTreeSet<T> {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.iter().map(|t| t.rename(iso)).collect()
    }
}

impl<T: Rename> Rename for Option<T> {
    fn rename(&self, iso: &Bijection) -> Result<Self, ModelError> {
        self.as_ref().map(|t| t.rename(iso)).transpose()
    }
}

/// `i(object)`.
pub fn apply_iso<T: Rename>(object: &T, iso: &Bijection) -> Result<T, ModelError> {
    object.rename(iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Label, Token};

    fn swap() -> Bijection {
        Bijection::new(BTreeMap::from([
            (Elem::new("a"), Elem::new("b")),
            (Elem::new("b"), Elem::new("a")),
        ]))
        .unwrap()
    }

    #[test]
    fn swap_renames_queries_pointwise() {
        let q = Query::new(vec![Token::Label(Label::new("l")), Token::Elem(Elem::new("a"))]).unwrap();
        let r = apply_iso(&q, &swap()).unwrap();
        assert_eq!(
            r,
            Query::new(vec![Token::Label(Label::new("l")), Token::Elem(Elem::new("b"))]).unwrap()
        );
        assert_eq!(apply_iso(&r, &swap()).unwrap(), q);
    }

    #[test]
    fn non_injective_map_rejected() {
        let m = BTreeMap::from([
            (Elem::new("a"), Elem::new("c")),
            (Elem::new("b"), Elem::new("c")),
        ]);
        assert!(matches!(Bijection::new(m), Err(ModelError::NotABijection(_))));
    }

    #[test]
    fn partial_map_rejected_on_use() {
        let q = Query::new(vec![Token::Elem(Elem::new("z"))]).unwrap();
        assert!(apply_iso(&q, &swap()).is_err());
    }
}
