use std::collections::BTreeSet;

use crate::model::{ExternalVocabulary, Label, Template, TemplateItem, Vocabulary};

/// Every tuple of length at most `bound` built from labels and the
/// placeholders `#1..#k` in order of occurrence. Includes the empty tuple.
pub fn standard_templates(labels: &BTreeSet<Label>, bound: usize) -> Vec<Template> {
    let mut out = Vec::new();
    let mut items = Vec::new();
    extend(labels, bound, &mut items, 0, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn extend(
    labels: &BTreeSet<Label>,
    bound: usize,
    items: &mut Vec<TemplateItem>,
    placeholders: usize,
    out: &mut Vec<Template>,
) {
    out.push(Template::new(items.clone()).expect("placeholders in order"));
    if items.len() == bound {
        return;
    }
    for l in labels {
        items.push(TemplateItem::Label(l.clone()));
        extend(labels, bound, items, placeholders, out);
        items.pop();
    }
    items.push(TemplateItem::Placeholder(placeholders + 1));
    extend(labels, bound, items, placeholders + 1, out);
    items.pop();
}

/// Symbol name for a standard template, e.g. `q_offer_1` for `[offer, #1]`.
pub fn standard_name(t: &Template) -> String {
    let mut name = String::from("q");
    for it in t.items() {
        name.push('_');
        match it {
            TemplateItem::Label(l) => name.push_str(&l.0),
            TemplateItem::Placeholder(i) => name.push_str(&i.to_string()),
        }
    }
    name
}

/// The standard external vocabulary: one symbol per nonempty standard
/// template, named so as not to collide with `avoid`.
pub fn standard_external(labels: &BTreeSet<Label>, bound: usize, avoid: &Vocabulary) -> ExternalVocabulary {
    let mut ext = ExternalVocabulary::new();
    for t in standard_templates(labels, bound) {
        if t.is_empty() {
            continue;
        }
        let mut name = standard_name(&t);
        while !avoid.arities(&name).is_empty() {
            name.push('_');
        }
        ext.declare(name, t).expect("fresh name");
    }
    ext
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        let t = Template::new(vec![
            TemplateItem::Label(Label::new("offer")),
            TemplateItem::Placeholder(1),
        ])
        .unwrap();
        assert_eq!(standard_name(&t), "q_offer_1");
    }

    #[test]
    fn avoids_state_symbols() {
        let labels = BTreeSet::from([Label::new("l")]);
        let vocab = Vocabulary::new().with("q_l", 0, crate::model::SymbolInfo::fixed());
        let ext = standard_external(&labels, 1, &vocab);
        let names: Vec<String> = ext.iter().map(|(id, _)| id.name.clone()).collect();
        assert!(names.contains(&"q_l_".to_string()));
        assert!(names.contains(&"q_1".to_string()));
    }
}
