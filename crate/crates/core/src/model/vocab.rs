use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A function symbol identified by name and arity, written `name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    pub name: String,
    pub arity: usize,
}

impl SymbolId {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        SymbolId {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl FromStr for SymbolId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arity) = s
            .rsplit_once('/')
            .ok_or_else(|| ModelError::BadSymbolRef(s.to_string()))?;
        let arity = arity
            .parse()
            .map_err(|_| ModelError::BadSymbolRef(s.to_string()))?;
        if name.is_empty() {
            return Err(ModelError::BadSymbolRef(s.to_string()));
        }
        Ok(SymbolId::new(name, arity))
    }
}

impl Serialize for SymbolId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Markings carried by a symbol of the state vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymbolInfo {
    pub is_static: bool,
    pub relational: bool,
}

impl SymbolInfo {
    pub const fn dynamic() -> Self {
        SymbolInfo {
            is_static: false,
            relational: false,
        }
    }

    pub const fn fixed() -> Self {
        SymbolInfo {
            is_static: true,
            relational: false,
        }
    }

    pub const fn relational(self) -> Self {
        SymbolInfo {
            relational: true,
            ..self
        }
    }
}

pub const TRUE: &str = "true";
pub const FALSE: &str = "false";
pub const UNDEF: &str = "undef";
pub const BOOLE: &str = "Boole";
pub const EQUAL: &str = "Equal";
pub const AND: &str = "And";
pub const OR: &str = "Or";
pub const NOT: &str = "Not";

/// The logic names with their arities and relational flags. All are static.
pub const LOGIC_NAMES: [(&str, usize, bool); 8] = [
    (TRUE, 0, true),
    (FALSE, 0, true),
    (UNDEF, 0, false),
    (BOOLE, 1, true),
    (EQUAL, 2, true),
    (AND, 2, true),
    (OR, 2, true),
    (NOT, 1, true),
];

pub fn is_logic_name(id: &SymbolId) -> bool {
    LOGIC_NAMES
        .iter()
        .any(|(n, a, _)| *n == id.name && *a == id.arity)
}

/// The state vocabulary. The logic names are always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: BTreeMap<SymbolId, SymbolInfo>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let symbols = LOGIC_NAMES
            .iter()
            .map(|&(name, arity, relational)| {
                (
                    SymbolId::new(name, arity),
                    SymbolInfo {
                        is_static: true,
                        relational,
                    },
                )
            })
            .collect();
        Vocabulary { symbols }
    }

    pub fn declare(&mut self, id: SymbolId, info: SymbolInfo) -> Result<(), ModelError> {
        if self.symbols.contains_key(&id) {
            return Err(ModelError::DuplicateSymbol(id));
        }
        self.symbols.insert(id, info);
        Ok(())
    }

    /// Builder-style `declare` for tests and fixtures.
    pub fn with(mut self, name: &str, arity: usize, info: SymbolInfo) -> Self {
        self.declare(SymbolId::new(name, arity), info)
            .expect("duplicate symbol");
        self
    }

    pub fn info(&self, id: &SymbolId) -> Option<SymbolInfo> {
        self.symbols.get(id).copied()
    }

    pub fn contains(&self, id: &SymbolId) -> bool {
        self.symbols.contains_key(id)
    }

    /// Arities under which `name` is declared.
    pub fn arities(&self, name: &str) -> Vec<usize> {
        self.symbols
            .keys()
            .filter(|k| k.name == name)
            .map(|k| k.arity)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymbolId, &SymbolInfo)> {
        self.symbols.iter()
    }

    /// Symbols other than the logic names.
    pub fn user_symbols(&self) -> impl Iterator<Item = (&SymbolId, &SymbolInfo)> {
        self.symbols.iter().filter(|(k, _)| !is_logic_name(k))
    }

    pub fn dynamic_symbols(&self) -> impl Iterator<Item = &SymbolId> {
        self.symbols
            .iter()
            .filter(|(_, i)| !i.is_static)
            .map(|(k, _)| k)
    }
}
