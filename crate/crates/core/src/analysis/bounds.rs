use crate::syntax::{Guard, Rule, Term};

/// How the two branches of a conditional contribute to its bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundMode {
    /// `B(φ) + B(R₀) + B(R₁)`.
    #[default]
    Sum,
    /// `B(φ) + max(B(R₀), B(R₁))`: still a bound, since only one branch runs.
    Max,
}

pub fn bound_term(t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::App(_, args) => 1 + args.iter().map(bound_term).sum::<usize>(),
    }
}

pub fn bound_guard(g: &Guard) -> usize {
    match g {
        Guard::Bool(t) => bound_term(t),
        Guard::Timing(s, t) => bound_term(s) + bound_term(t),
        Guard::KAnd(a, b) | Guard::KOr(a, b) => bound_guard(a) + bound_guard(b),
        Guard::KNot(a) => bound_guard(a),
    }
}

pub fn bound_rule(r: &Rule) -> usize {
    bound_rule_with(r, BoundMode::Sum)
}

pub fn bound_rule_with(r: &Rule, mode: BoundMode) -> usize {
    match r {
        Rule::Update { args, value, .. } => {
            args.iter().map(bound_term).sum::<usize>() + bound_term(value)
        }
        Rule::Issue { args, .. } => 1 + args.iter().map(bound_term).sum::<usize>(),
        Rule::Fail => 0,
        Rule::Cond(g, a, b) => {
            let (ba, bb) = (bound_rule_with(a, mode), bound_rule_with(b, mode));
            bound_guard(g)
                + match mode {
                    BoundMode::Sum => ba + bb,
                    BoundMode::Max => ba.max(bb),
                }
        }
        Rule::Par(rs) => rs.iter().map(|c| bound_rule_with(c, mode)).sum(),
    }
}
