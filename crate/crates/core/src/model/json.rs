//! JSON presentation of structures.
//!
//! ```json
//! {"elements": ["a", "b"],
//!  "functions": {"f/2": {"default": "undef", "table": [[["a", "b"], "a"]]}},
//!  "dynamic": ["f/2"],
//!  "relational": []}
//! ```
//!
//! Symbols not listed under `dynamic` are static. `true/0`, `false/0` and
//! `undef/0` may appear under `functions` to choose which elements interpret
//! them; otherwise the elements named `true`, `false` and `undef` are used.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::vocab::{FALSE, TRUE, UNDEF};
use super::{is_logic_name, Elem, ModelError, Structure, SymbolId, SymbolInfo, Vocabulary};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Elem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<(Vec<Elem>, Elem)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureJson {
    pub elements: Vec<Elem>,
    #[serde(default)]
    pub functions: BTreeMap<SymbolId, FunctionJson>,
    #[serde(default)]
    pub dynamic: Vec<SymbolId>,
    #[serde(default)]
    pub relational: Vec<SymbolId>,
}

impl TryFrom<StructureJson> for Structure {
    type Error = ModelError;

    fn try_from(j: StructureJson) -> Result<Self, ModelError> {
        let dynamic: BTreeSet<&SymbolId> = j.dynamic.iter().collect();
        let relational: BTreeSet<&SymbolId> = j.relational.iter().collect();
        let mut vocab = Vocabulary::new();
        let mut names: BTreeSet<&SymbolId> = j.functions.keys().collect();
        names.extend(dynamic.iter().copied());
        names.extend(relational.iter().copied());
        for id in names {
            if is_logic_name(id) {
                if dynamic.contains(id) || relational.contains(id) {
                    return Err(ModelError::MarkingMismatch(id.clone()));
                }
                continue;
            }
            vocab.declare(
                id.clone(),
                SymbolInfo {
                    is_static: !dynamic.contains(id),
                    relational: relational.contains(id),
                },
            )?;
        }
        let constant = |name: &str| -> Result<Elem, ModelError> {
            match j.functions.get(&SymbolId::new(name, 0)) {
                Some(f) if !f.table.is_empty() => {
                    Err(ModelError::LogicNameTable(SymbolId::new(name, 0)))
                }
                Some(FunctionJson {
                    default: Some(e), ..
                }) => Ok(e.clone()),
                _ => Ok(Elem::new(name)),
            }
        };
        let mut x = Structure::new(
            &vocab,
            j.elements.iter().cloned(),
            constant(TRUE)?,
            constant(FALSE)?,
            constant(UNDEF)?,
        )?;
        for (id, f) in &j.functions {
            if is_logic_name(id) {
                if id.arity > 0 {
                    return Err(ModelError::LogicNameTable(id.clone()));
                }
                continue;
            }
            if let Some(d) = &f.default {
                x.set_default(id, d.clone())?;
            }
            for (args, v) in &f.table {
                x.set(id, args.clone(), v.clone())?;
            }
        }
        Ok(x)
    }
}

impl From<&Structure> for StructureJson {
    fn from(x: &Structure) -> Self {
        let mut functions = BTreeMap::new();
        for (name, e) in [
            (TRUE, x.true_elem()),
            (FALSE, x.false_elem()),
            (UNDEF, x.undef_elem()),
        ] {
            if e.as_str() != name {
                functions.insert(
                    SymbolId::new(name, 0),
                    FunctionJson {
                        default: Some(e.clone()),
                        table: vec![],
                    },
                );
            }
        }
        let mut dynamic = Vec::new();
        let mut relational = Vec::new();
        for (id, it) in x.interpretations() {
            let info = x.symbol_info(id).expect("interpreted symbols are declared");
            if !info.is_static {
                dynamic.push(id.clone());
            }
            if info.relational {
                relational.push(id.clone());
            }
            functions.insert(
                id.clone(),
                FunctionJson {
                    default: Some(it.default.clone()),
                    table: it
                        .table
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect(),
                },
            );
        }
        StructureJson {
            elements: x.elements().iter().cloned().collect(),
            functions,
            dynamic,
            relational,
        }
    }
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StructureJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = StructureJson::deserialize(d)?;
        Structure::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_structure_json() {
        let text = r#"{"elements":["a","b"],
            "functions":{"f/2":{"default":"undef","table":[[["a","b"],"a"]]},
                         "p/0":{}},
            "dynamic":["f/2"], "relational":["p/0"]}"#;
        let x: Structure = serde_json::from_str(text).unwrap();
        assert_eq!(x.elements().len(), 5);
        assert_eq!(
            x.lookup("f", &[Elem::new("a"), Elem::new("b")]).unwrap(),
            Elem::new("a")
        );
        assert_eq!(x.lookup("p", &[]).unwrap(), Elem::new("false"));
        let info = x.symbol_info(&SymbolId::new("f", 2)).unwrap();
        assert!(!info.is_static && !info.relational);
        let back: Structure =
            serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn custom_truth_elements() {
        let text = r#"{"elements":["t","f","u"],
            "functions":{"true/0":{"default":"t"},"false/0":{"default":"f"},"undef/0":{"default":"u"}}}"#;
        let x: Structure = serde_json::from_str(text).unwrap();
        assert_eq!(x.true_elem(), &Elem::new("t"));
        assert_eq!(x.elements().len(), 3);
    }

    #[test]
    fn rejects_bad_tables() {
        let text = r#"{"elements":[],"functions":{"Equal/2":{"table":[[["true","true"],"true"]]}}}"#;
        assert!(serde_json::from_str::<Structure>(text).is_err());
        let text = r#"{"elements":["a"],"functions":{"p/0":{"default":"a"}},"relational":["p/0"]}"#;
        assert!(serde_json::from_str::<Structure>(text).is_err());
        let text = r#"{"elements":[],"functions":{"f/0":{"default":"zz"}}}"#;
        assert!(serde_json::from_str::<Structure>(text).is_err());
    }
}
