use std::collections::{BTreeMap, BTreeSet};

use super::vocab::{AND, BOOLE, EQUAL, FALSE, NOT, OR, TRUE, UNDEF};
use super::{is_logic_name, Elem, ModelError, SymbolId, SymbolInfo, Vocabulary};

/// Finite interpretation of one symbol: a partial table plus a default value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interp {
    pub default: Elem,
    pub table: BTreeMap<Vec<Elem>, Elem>,
}

impl Interp {
    pub fn value(&self, args: &[Elem]) -> &Elem {
        self.table.get(args).unwrap_or(&self.default)
    }
}

/// A finite structure for a vocabulary.
///
/// The logic names are never stored in tables; their interpretations are
/// computed from the three distinguished elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    vocab: VocabKey,
    elements: BTreeSet<Elem>,
    truth: Elem,
    falsity: Elem,
    undef: Elem,
    interp: BTreeMap<SymbolId, Interp>,
}

// Vocabulary is not Hash; structures hash through a sorted symbol list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct VocabKey(Vec<(SymbolId, bool, bool)>);

impl VocabKey {
    fn of(v: &Vocabulary) -> Self {
        VocabKey(
            v.iter()
                .map(|(k, i)| (k.clone(), i.is_static, i.relational))
                .collect(),
        )
    }

    fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        for (k, s, r) in &self.0 {
            if !is_logic_name(k) {
                v.declare(
                    k.clone(),
                    SymbolInfo {
                        is_static: *s,
                        relational: *r,
                    },
                )
                .expect("vocabulary key has unique symbols");
            }
        }
        v
    }
}

impl Structure {
    /// A structure with every non-logic symbol at its default
    /// (`undef`, or `false` for relational symbols).
    pub fn new(
        vocab: &Vocabulary,
        elements: impl IntoIterator<Item = Elem>,
        truth: Elem,
        falsity: Elem,
        undef: Elem,
    ) -> Result<Self, ModelError> {
        let mut elements: BTreeSet<Elem> = elements.into_iter().collect();
        if truth == falsity || truth == undef || falsity == undef {
            return Err(ModelError::InvalidStructure(
                "true, false and undef must be distinct".into(),
            ));
        }
        elements.insert(truth.clone());
        elements.insert(falsity.clone());
        elements.insert(undef.clone());
        let mut interp = BTreeMap::new();
        for (id, info) in vocab.user_symbols() {
            let default = if info.relational {
                falsity.clone()
            } else {
                undef.clone()
            };
            interp.insert(
                id.clone(),
                Interp {
                    default,
                    table: BTreeMap::new(),
                },
            );
        }
        Ok(Structure {
            vocab: VocabKey::of(vocab),
            elements,
            truth,
            falsity,
            undef,
            interp,
        })
    }

    /// Structure whose distinguished elements are named `true`, `false`, `undef`.
    pub fn standard(vocab: &Vocabulary, extra: &[&str]) -> Self {
        Structure::new(
            vocab,
            extra.iter().map(|e| Elem::new(*e)),
            Elem::new(TRUE),
            Elem::new(FALSE),
            Elem::new(UNDEF),
        )
        .expect("standard structure")
    }

    pub fn vocabulary(&self) -> Vocabulary {
        self.vocab.vocabulary()
    }

    pub fn symbol_info(&self, id: &SymbolId) -> Option<SymbolInfo> {
        self.vocab
            .0
            .iter()
            .find(|(k, _, _)| k == id)
            .map(|(_, s, r)| SymbolInfo {
                is_static: *s,
                relational: *r,
            })
    }

    pub fn elements(&self) -> &BTreeSet<Elem> {
        &self.elements
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.elements.contains(e)
    }

    pub fn true_elem(&self) -> &Elem {
        &self.truth
    }

    pub fn false_elem(&self) -> &Elem {
        &self.falsity
    }

    pub fn undef_elem(&self) -> &Elem {
        &self.undef
    }

    pub fn boolean(&self, b: bool) -> &Elem {
        if b {
            &self.truth
        } else {
            &self.falsity
        }
    }

    pub fn is_boolean(&self, e: &Elem) -> bool {
        *e == self.truth || *e == self.falsity
    }

    pub fn interp(&self, id: &SymbolId) -> Option<&Interp> {
        self.interp.get(id)
    }

    pub fn interpretations(&self) -> impl Iterator<Item = (&SymbolId, &Interp)> {
        self.interp.iter()
    }

    fn check_elem(&self, e: &Elem) -> Result<(), ModelError> {
        if self.elements.contains(e) {
            Ok(())
        } else {
            Err(ModelError::ForeignElement(e.clone()))
        }
    }

    fn user_symbol(&self, id: &SymbolId) -> Result<SymbolInfo, ModelError> {
        if is_logic_name(id) {
            return Err(ModelError::LogicNameTable(id.clone()));
        }
        self.symbol_info(id)
            .ok_or_else(|| ModelError::UnknownSymbol(id.to_string()))
    }

    /// Set `f(args) = value`; entries equal to the default are dropped so
    /// that equal functions have equal presentations.
    pub fn set(&mut self, id: &SymbolId, args: Vec<Elem>, value: Elem) -> Result<(), ModelError> {
        let info = self.user_symbol(id)?;
        if args.len() != id.arity {
            return Err(ModelError::ArityMismatch {
                symbol: id.name.clone(),
                expected: id.arity,
                got: args.len(),
            });
        }
        for a in &args {
            self.check_elem(a)?;
        }
        self.check_elem(&value)?;
        if info.relational && !self.is_boolean(&value) {
            return Err(ModelError::NonBooleanRelational(id.clone()));
        }
        let it = self.interp.get_mut(id).expect("declared symbol has interp");
        if value == it.default {
            it.table.remove(&args);
        } else {
            it.table.insert(args, value);
        }
        Ok(())
    }

    /// Change the default value of a symbol, keeping every explicit entry.
    pub fn set_default(&mut self, id: &SymbolId, default: Elem) -> Result<(), ModelError> {
        let info = self.user_symbol(id)?;
        self.check_elem(&default)?;
        if info.relational && !self.is_boolean(&default) {
            return Err(ModelError::NonBooleanRelational(id.clone()));
        }
        let it = self.interp.get_mut(id).expect("declared symbol has interp");
        it.table.retain(|_, v| *v != default);
        it.default = default;
        Ok(())
    }

    /// `f_X(args)`, with the logic names computed per their fixed meaning.
    pub fn lookup(&self, name: &str, args: &[Elem]) -> Result<Elem, ModelError> {
        for a in args {
            self.check_elem(a)?;
        }
        let id = SymbolId::new(name, args.len());
        let bool_of = |e: &Elem| -> Option<bool> {
            if *e == self.truth {
                Some(true)
            } else if *e == self.falsity {
                Some(false)
            } else {
                None
            }
        };
        let b = |v: bool| self.boolean(v).clone();
        match (name, args) {
            (TRUE, []) => return Ok(self.truth.clone()),
            (FALSE, []) => return Ok(self.falsity.clone()),
            (UNDEF, []) => return Ok(self.undef.clone()),
            (BOOLE, [a]) => return Ok(b(bool_of(a).is_some())),
            (EQUAL, [a, c]) => return Ok(b(a == c)),
            (AND, [a, c]) => {
                return Ok(match (bool_of(a), bool_of(c)) {
                    (Some(x), Some(y)) => b(x && y),
                    _ => b(false),
                })
            }
            (OR, [a, c]) => {
                return Ok(match (bool_of(a), bool_of(c)) {
                    (Some(x), Some(y)) => b(x || y),
                    _ => b(false),
                })
            }
            (NOT, [a]) => return Ok(b(matches!(bool_of(a), Some(false)))),
            _ => {}
        }
        match self.interp.get(&id) {
            Some(it) => Ok(it.value(args).clone()),
            None => {
                let known: Vec<usize> = self
                    .vocab
                    .0
                    .iter()
                    .filter(|(k, _, _)| k.name == name)
                    .map(|(k, _, _)| k.arity)
                    .collect();
                match known.first() {
                    Some(&expected) => Err(ModelError::ArityMismatch {
                        symbol: name.to_string(),
                        expected,
                        got: args.len(),
                    }),
                    None => Err(ModelError::UnknownSymbol(id.to_string())),
                }
            }
        }
    }

    /// Extend this structure to cover every symbol of `vocab`. Symbols already
    /// present must carry the same markings.
    pub fn conform(&self, vocab: &Vocabulary) -> Result<Structure, ModelError> {
        let mut merged = self.vocabulary();
        for (id, info) in vocab.user_symbols() {
            match merged.info(id) {
                Some(have) if have != *info => {
                    return Err(ModelError::MarkingMismatch(id.clone()));
                }
                Some(_) => {}
                None => merged.declare(id.clone(), *info)?,
            }
        }
        let mut out = Structure::new(
            &merged,
            self.elements.iter().cloned(),
            self.truth.clone(),
            self.falsity.clone(),
            self.undef.clone(),
        )?;
        for (id, it) in &self.interp {
            out.interp.insert(id.clone(), it.clone());
        }
        Ok(out)
    }

    /// Rebuild with renamed elements; `rename` must be injective.
    pub(crate) fn map_elems(
        &self,
        mut rename: impl FnMut(&Elem) -> Result<Elem, ModelError>,
    ) -> Result<Structure, ModelError> {
        let elements = self
            .elements
            .iter()
            .map(&mut rename)
            .collect::<Result<BTreeSet<_>, _>>()?;
        let mut interp = BTreeMap::new();
        for (id, it) in &self.interp {
            let mut table = BTreeMap::new();
            for (args, v) in &it.table {
                let args = args.iter().map(&mut rename).collect::<Result<Vec<_>, _>>()?;
                table.insert(args, rename(v)?);
            }
            interp.insert(
                id.clone(),
                Interp {
                    default: rename(&it.default)?,
                    table,
                },
            );
        }
        Ok(Structure {
            vocab: self.vocab.clone(),
            elements,
            truth: rename(&self.truth)?,
            falsity: rename(&self.falsity)?,
            undef: rename(&self.undef)?,
            interp,
        })
    }

    /// Every argument tuple of the given arity over the base set.
    pub fn tuples(&self, arity: usize) -> Vec<Vec<Elem>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for prefix in &out {
                for e in &self.elements {
                    let mut t = prefix.clone();
                    t.push(e.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Structure {
        let v = Vocabulary::new()
            .with("f", 1, SymbolInfo::dynamic())
            .with("p", 1, SymbolInfo::fixed().relational());
        Structure::standard(&v, &["a", "b"])
    }

    #[test]
    fn logic_names_are_computed() {
        let x = sample();
        let a = Elem::new("a");
        let t = x.true_elem().clone();
        let f = x.false_elem().clone();
        let u = x.undef_elem().clone();
        assert_eq!(x.lookup("Equal", &[a.clone(), a.clone()]).unwrap(), t);
        assert_eq!(x.lookup("Equal", &[a.clone(), Elem::new("b")]).unwrap(), f);
        assert_eq!(x.lookup("Boole", std::slice::from_ref(&u)).unwrap(), f);
        assert_eq!(x.lookup("Boole", std::slice::from_ref(&f)).unwrap(), t);
        assert_eq!(x.lookup("And", &[t.clone(), a.clone()]).unwrap(), f);
        assert_eq!(x.lookup("Or", &[t.clone(), a.clone()]).unwrap(), f);
        assert_eq!(x.lookup("Or", &[f.clone(), t.clone()]).unwrap(), t);
        assert_eq!(x.lookup("Not", &[a]).unwrap(), f);
        assert_eq!(x.lookup("Not", &[f]).unwrap(), t);
    }

    #[test]
    fn lookup_errors() {
        let x = sample();
        assert!(matches!(
            x.lookup("g", &[]),
            Err(ModelError::UnknownSymbol(_))
        ));
        assert!(matches!(
            x.lookup("f", &[]),
            Err(ModelError::ArityMismatch { .. })
        ));
        assert!(matches!(
            x.lookup("f", &[Elem::new("zz")]),
            Err(ModelError::ForeignElement(_))
        ));
    }

    #[test]
    fn defaults_and_tables() {
        let mut x = sample();
        let f = SymbolId::new("f", 1);
        let p = SymbolId::new("p", 1);
        assert_eq!(x.lookup("f", &[Elem::new("a")]).unwrap(), *x.undef_elem());
        assert_eq!(x.lookup("p", &[Elem::new("a")]).unwrap(), *x.false_elem());
        x.set(&f, vec![Elem::new("a")], Elem::new("b")).unwrap();
        assert_eq!(x.lookup("f", &[Elem::new("a")]).unwrap(), Elem::new("b"));
        assert!(matches!(
            x.set(&p, vec![Elem::new("a")], Elem::new("b")),
            Err(ModelError::NonBooleanRelational(_))
        ));
        // setting back to the default removes the entry
        let u = x.undef_elem().clone();
        x.set(&f, vec![Elem::new("a")], u).unwrap();
        assert_eq!(x, sample());
    }

    #[test]
    fn logic_names_have_no_tables() {
        let mut x = sample();
        let t = x.true_elem().clone();
        assert!(matches!(
            x.set(&SymbolId::new("Equal", 2), vec![t.clone(), t.clone()], t),
            Err(ModelError::LogicNameTable(_))
        ));
    }
}
