use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Elem, ModelError, Structure, SymbolId};

/// A location-value triple `⟨f, (a1..an), a0⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Update {
    pub symbol: SymbolId,
    pub args: Vec<Elem>,
    pub value: Elem,
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<&str> = self.args.iter().map(|a| a.as_str()).collect();
        write!(f, "<{}, ({}), {}>", self.symbol, args.join(", "), self.value)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UpdateSet(BTreeSet<Update>);

impl UpdateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(u: Update) -> Self {
        UpdateSet(BTreeSet::from([u]))
    }

    pub fn insert(&mut self, u: Update) {
        self.0.insert(u);
    }

    pub fn extend(&mut self, other: &UpdateSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn iter(&self) -> impl Iterator<Item = &Update> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &UpdateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Two members at the same location with different values.
    pub fn has_clash(&self) -> bool {
        let mut seen: BTreeMap<(&SymbolId, &Vec<Elem>), &Elem> = BTreeMap::new();
        for u in &self.0 {
            if let Some(v) = seen.insert((&u.symbol, &u.args), &u.value) {
                if *v != u.value {
                    return true;
                }
            }
        }
        false
    }

    pub(crate) fn map_elems(
        &self,
        mut rename: impl FnMut(&Elem) -> Result<Elem, ModelError>,
    ) -> Result<UpdateSet, ModelError> {
        let mut out = UpdateSet::new();
        for u in &self.0 {
            out.insert(Update {
                symbol: u.symbol.clone(),
                args: u.args.iter().map(&mut rename).collect::<Result<_, _>>()?,
                value: rename(&u.value)?,
            });
        }
        Ok(out)
    }
}

impl FromIterator<Update> for UpdateSet {
    fn from_iter<I: IntoIterator<Item = Update>>(iter: I) -> Self {
        UpdateSet(iter.into_iter().collect())
    }
}

/// The successor structure: same base set, updated locations overwritten.
pub fn apply_updates(x: &Structure, updates: &UpdateSet) -> Result<Structure, ModelError> {
    if updates.has_clash() {
        return Err(ModelError::Clash);
    }
    let mut y = x.clone();
    for u in updates.iter() {
        match x.symbol_info(&u.symbol) {
            Some(info) if info.is_static => {
                return Err(ModelError::StaticUpdate(u.symbol.clone()))
            }
            Some(_) => {}
            None => return Err(ModelError::UnknownSymbol(u.symbol.to_string())),
        }
        y.set(&u.symbol, u.args.clone(), u.value.clone())?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SymbolInfo, Vocabulary};

    fn upd(f: &str, v: &str) -> Update {
        Update {
            symbol: SymbolId::new(f, 0),
            args: vec![],
            value: Elem::new(v),
        }
    }

    #[test]
    fn clash_detection() {
        let mut d = UpdateSet::new();
        d.insert(upd("f", "true"));
        assert!(!d.has_clash());
        d.insert(upd("f", "true"));
        assert!(!d.has_clash());
        d.insert(upd("f", "false"));
        assert!(d.has_clash());
    }

    #[test]
    fn successor_structure() {
        let v = Vocabulary::new()
            .with("f", 0, SymbolInfo::dynamic())
            .with("c", 0, SymbolInfo::fixed());
        let x = Structure::standard(&v, &[]);
        assert_eq!(apply_updates(&x, &UpdateSet::new()).unwrap(), x);
        let y = apply_updates(&x, &UpdateSet::single(upd("f", "true"))).unwrap();
        assert_eq!(y.lookup("f", &[]).unwrap(), Elem::new("true"));
        assert_eq!(y.elements(), x.elements());
        assert_eq!(y.lookup("c", &[]).unwrap(), x.lookup("c", &[]).unwrap());
        let clashing: UpdateSet = [upd("f", "true"), upd("f", "false")].into_iter().collect();
        assert!(matches!(apply_updates(&x, &clashing), Err(ModelError::Clash)));
        assert!(matches!(
            apply_updates(&x, &UpdateSet::single(upd("c", "true"))),
            Err(ModelError::StaticUpdate(_))
        ));
    }
}
