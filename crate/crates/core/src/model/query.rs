use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ModelError, SymbolId};

/// Opaque element id of a structure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub String);

impl Elem {
    pub fn new(id: impl Into<String>) -> Self {
        Elem(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Wire encoding `e:<id>`.
    pub fn encoded(&self) -> String {
        format!("e:{}", self.0)
    }

    /// Accepts both `e:<id>` and a bare id.
    pub fn decode(s: &str) -> Elem {
        Elem::new(s.strip_prefix("e:").unwrap_or(s))
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Query label. Labels live in their own namespace, disjoint from elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One component of a query: an element or a label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Elem(Elem),
    Label(Label),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Elem(e) => write!(f, "e:{e}"),
            Token::Label(l) => write!(f, "l:{l}"),
        }
    }
}

impl FromStr for Token {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(e) = s.strip_prefix("e:") {
            Ok(Token::Elem(Elem::new(e)))
        } else if let Some(l) = s.strip_prefix("l:") {
            Ok(Token::Label(Label::new(l)))
        } else {
            Err(ModelError::BadToken(s.to_string()))
        }
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A potential query: a nonempty tuple over elements and labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Query(Vec<Token>);

impl Query {
    pub fn new(tokens: Vec<Token>) -> Result<Self, ModelError> {
        if tokens.is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        Ok(Query(tokens))
    }

    /// Query consisting of labels only; panics on an empty list.
    pub fn labels(names: &[&str]) -> Self {
        Query::new(names.iter().map(|n| Token::Label(Label::new(*n))).collect())
            .expect("empty query")
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Elem> {
        self.0.iter().filter_map(|t| match t {
            Token::Elem(e) => Some(e),
            Token::Label(_) => None,
        })
    }

    /// Shape key used by reply universes: labels verbatim, elements as `#`.
    pub fn shape(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|t| match t {
                Token::Elem(_) => "#".to_string(),
                Token::Label(l) => l.0.clone(),
            })
            .collect();
        parts.join(",")
    }

    pub(crate) fn map_elems(&self, mut f: impl FnMut(&Elem) -> Result<Elem, ModelError>) -> Result<Query, ModelError> {
        let tokens = self
            .0
            .iter()
            .map(|t| match t {
                Token::Elem(e) => f(e).map(Token::Elem),
                Token::Label(l) => Ok(Token::Label(l.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Query(tokens))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl<'de> Deserialize<'de> for Query {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tokens = Vec::<Token>::deserialize(d)?;
        Query::new(tokens).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateItem {
    Label(Label),
    /// 1-based placeholder `#i`.
    Placeholder(usize),
}

/// A query template: labels and placeholders `#1..#n`, each placeholder once.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Template {
    items: Vec<TemplateItem>,
    arity: usize,
}

impl Template {
    pub fn new(items: Vec<TemplateItem>) -> Result<Self, ModelError> {
        let mut seen = Vec::new();
        for it in &items {
            if let TemplateItem::Placeholder(i) = it {
                seen.push(*i);
            }
        }
        let n = seen.len();
        seen.sort_unstable();
        if seen.iter().copied().ne(1..=n) {
            return Err(ModelError::BadTemplate(format!(
                "placeholders must be #1..#{n}, each exactly once"
            )));
        }
        Ok(Template { items, arity: n })
    }

    /// The template `[name, #1, .., #arity]`.
    pub fn labelled(name: &str, arity: usize) -> Self {
        let mut items = vec![TemplateItem::Label(Label::new(name))];
        items.extend((1..=arity).map(TemplateItem::Placeholder));
        Template { items, arity }
    }

    pub fn items(&self) -> &[TemplateItem] {
        &self.items
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.items.iter().filter_map(|i| match i {
            TemplateItem::Label(l) => Some(l),
            TemplateItem::Placeholder(_) => None,
        })
    }

    /// `Q[a1, .., an]`.
    pub fn instantiate(&self, args: &[Elem]) -> Result<Query, ModelError> {
        if args.len() != self.arity {
            return Err(ModelError::ArityMismatch {
                symbol: format!("template {self}"),
                expected: self.arity,
                got: args.len(),
            });
        }
        let tokens = self
            .items
            .iter()
            .map(|it| match it {
                TemplateItem::Label(l) => Token::Label(l.clone()),
                TemplateItem::Placeholder(i) => Token::Elem(args[i - 1].clone()),
            })
            .collect();
        Query::new(tokens)
    }

    /// Inverse of `instantiate`: the arguments if `q` is an instance.
    pub fn match_query(&self, q: &Query) -> Option<Vec<Elem>> {
        if q.len() != self.items.len() {
            return None;
        }
        let mut args = vec![None; self.arity];
        for (it, tok) in self.items.iter().zip(q.tokens()) {
            match (it, tok) {
                (TemplateItem::Label(l), Token::Label(m)) if l == m => {}
                (TemplateItem::Placeholder(i), Token::Elem(e)) => args[i - 1] = Some(e.clone()),
                _ => return None,
            }
        }
        args.into_iter().collect()
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, it) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match it {
                TemplateItem::Label(l) => write!(f, "{l}")?,
                TemplateItem::Placeholder(n) => write!(f, "#{n}")?,
            }
        }
        f.write_str("]")
    }
}

/// External function symbols with their template assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExternalVocabulary {
    symbols: BTreeMap<SymbolId, Template>,
}

impl ExternalVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, template: Template) -> Result<SymbolId, ModelError> {
        let id = SymbolId::new(name, template.arity());
        if self.symbols.contains_key(&id) {
            return Err(ModelError::DuplicateSymbol(id));
        }
        self.symbols.insert(id.clone(), template);
        Ok(id)
    }

    pub fn with(mut self, name: &str, template: Template) -> Self {
        self.declare(name, template).expect("duplicate external symbol");
        self
    }

    pub fn template(&self, id: &SymbolId) -> Option<&Template> {
        self.symbols.get(id)
    }

    pub fn contains(&self, id: &SymbolId) -> bool {
        self.symbols.contains_key(id)
    }

    pub fn arities(&self, name: &str) -> Vec<usize> {
        self.symbols
            .keys()
            .filter(|k| k.name == name)
            .map(|k| k.arity)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SymbolId, &Template)> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Keep only the symbols accepted by `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&SymbolId) -> bool) {
        self.symbols.retain(|k, _| keep(k));
    }
}
