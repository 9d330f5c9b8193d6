use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::SyntaxError;

const TIMING: [(&str, TimingOp); 5] = [
    ("preceq", TimingOp::Preceq),
    ("prec", TimingOp::Prec),
    ("approx", TimingOp::Approx),
    ("succeq", TimingOp::Succeq),
    ("succ", TimingOp::Succ),
];

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    scope: Vec<String>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let span = self.span();
        Err(SyntaxError {
            line: span.line,
            col: span.col,
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&t.to_string())
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(w) if *w == k)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn number(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error("a number"),
        }
    }

    fn program(&mut self) -> PResult<SugarProgram> {
        let mut decls = Vec::new();
        let mut labels = Vec::new();
        loop {
            if self.is_kw("static") || self.is_kw("dynamic") || self.is_kw("external") {
                let kind = match self.bump() {
                    Tok::Kw("static") => DeclKind::Static,
                    Tok::Kw("dynamic") => DeclKind::Dynamic,
                    _ => DeclKind::External,
                };
                let relational = self.is_kw("relational");
                if relational {
                    self.bump();
                }
                loop {
                    decls.push(self.decl(kind, relational)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.is_kw("labels") {
                self.bump();
                loop {
                    let span = self.span();
                    labels.push((self.ident()?, span));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.is_kw("rule") {
                self.bump();
                break;
            } else {
                return self.error("a declaration or `rule`");
            }
        }
        let rule = self.rule()?;
        if self.peek() != &Tok::Eof {
            return self.error("end of input");
        }
        Ok(SugarProgram {
            decls,
            labels,
            rule,
        })
    }

    fn decl(&mut self, kind: DeclKind, relational: bool) -> PResult<Decl> {
        let span = self.span();
        let name = self.ident()?;
        self.expect(Tok::Slash)?;
        let arity = self.number()?;
        let template = if kind == DeclKind::External && self.eat(&Tok::Eq) {
            self.expect(Tok::LBracket)?;
            let mut items = Vec::new();
            if !self.eat(&Tok::RBracket) {
                loop {
                    if self.eat(&Tok::Hash) {
                        items.push(RawTemplateItem::Placeholder(self.number()?));
                    } else {
                        items.push(RawTemplateItem::Label(self.ident()?));
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
            Some(items)
        } else {
            None
        };
        Ok(Decl {
            kind,
            relational,
            name,
            arity,
            template,
            span,
        })
    }

    fn rule(&mut self) -> PResult<SugarRule> {
        let mut r = self.prim_rule()?;
        while self.is_kw("par") {
            self.bump();
            let rhs = self.prim_rule()?;
            r = SugarRule::InfixPar(Box::new(r), Box::new(rhs));
        }
        Ok(r)
    }

    fn prim_rule(&mut self) -> PResult<SugarRule> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Kw("skip") => {
                self.bump();
                Ok(SugarRule::Skip)
            }
            Tok::Kw("fail") => {
                self.bump();
                Ok(SugarRule::Fail)
            }
            Tok::Kw("issue") => {
                self.bump();
                let term = self.term()?;
                Ok(SugarRule::Issue { term, span })
            }
            Tok::Kw("if") => {
                self.bump();
                let g = self.guard()?;
                if !self.is_kw("then") {
                    return self.error("`then` or a guard operator");
                }
                self.bump();
                let then = self.rule()?;
                let r = if self.is_kw("else") {
                    self.bump();
                    let els = self.rule()?;
                    SugarRule::Cond(g, Box::new(then), Box::new(els))
                } else {
                    SugarRule::IfNoElse(g, Box::new(then))
                };
                if !self.is_kw("endif") {
                    return self.error("`endif`");
                }
                self.bump();
                Ok(r)
            }
            Tok::Kw("par") => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let mut rs = Vec::new();
                while self.peek() != &Tok::RBrace {
                    rs.push(self.rule()?);
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SugarRule::Par(rs))
            }
            Tok::Kw(k @ ("nlet" | "vlet")) => {
                self.bump();
                let mut bindings: Vec<Binding> = Vec::new();
                loop {
                    let span = self.span();
                    let var = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let term = self.term()?;
                    bindings.push(Binding { var, term, span });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                if !self.is_kw("in") {
                    return self.error("`in` or `,`");
                }
                self.bump();
                let depth = self.scope.len();
                self.scope.extend(bindings.iter().map(|b| b.var.clone()));
                let body = self.rule();
                self.scope.truncate(depth);
                let body = Box::new(body?);
                Ok(if k == "nlet" {
                    SugarRule::NLet(bindings, body)
                } else {
                    SugarRule::VLet(bindings, body)
                })
            }
            Tok::LParen => {
                self.bump();
                let r = self.rule()?;
                self.expect(Tok::RParen)?;
                Ok(r)
            }
            Tok::Ident(_) => {
                let target = self.term()?;
                if !self.eat(&Tok::Assign) {
                    return self.error("`:=`");
                }
                let value = self.term()?;
                Ok(SugarRule::Update {
                    target,
                    value,
                    span,
                })
            }
            _ => self.error("a rule"),
        }
    }

    fn guard(&mut self) -> PResult<SGuard> {
        let mut g = self.kand_guard()?;
        while self.is_kw("kor") {
            self.bump();
            let rhs = self.kand_guard()?;
            g = SGuard::KOr(Box::new(g), Box::new(rhs));
        }
        Ok(g)
    }

    fn kand_guard(&mut self) -> PResult<SGuard> {
        let mut g = self.unary_guard()?;
        while self.is_kw("kand") {
            self.bump();
            let rhs = self.unary_guard()?;
            g = SGuard::KAnd(Box::new(g), Box::new(rhs));
        }
        Ok(g)
    }

    fn unary_guard(&mut self) -> PResult<SGuard> {
        if self.is_kw("knot") {
            self.bump();
            return Ok(SGuard::KNot(Box::new(self.unary_guard()?)));
        }
        if self.eat(&Tok::LParen) {
            let g = self.guard()?;
            self.expect(Tok::RParen)?;
            return Ok(g);
        }
        let s = self.term()?;
        for (kw, op) in TIMING {
            if self.is_kw(kw) {
                self.bump();
                let t = self.term()?;
                return Ok(SGuard::Timing(op, s, t));
            }
        }
        Ok(SGuard::Bool(s))
    }

    fn term(&mut self) -> PResult<STerm> {
        let lhs = self.postfix_term()?;
        if self.peek() == &Tok::Eq {
            let span = lhs.span();
            self.bump();
            let rhs = self.postfix_term()?;
            if self.peek() == &Tok::Eq {
                return self.error("no second `=` (equality does not associate)");
            }
            return Ok(STerm::App("Equal".into(), vec![lhs, rhs], span));
        }
        Ok(lhs)
    }

    fn postfix_term(&mut self) -> PResult<STerm> {
        let mut t = self.atom_term()?;
        while self.eat(&Tok::Bang) {
            t = STerm::Bang(Box::new(t));
        }
        Ok(t)
    }

    fn atom_term(&mut self) -> PResult<STerm> {
        let span = self.span();
        let name = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return self.error("a term"),
        };
        if self.peek() == &Tok::LParen {
            self.bump();
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.term()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            return Ok(STerm::App(name, args, span));
        }
        if self.scope.contains(&name) {
            Ok(STerm::Var(name, span))
        } else {
            Ok(STerm::App(name, Vec::new(), span))
        }
    }
}

/// Parse a complete program.
pub fn parse_program(src: &str) -> Result<SugarProgram, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope: Vec::new(),
    };
    p.program()
}

/// Parse a guard on its own, with no bound variables.
pub fn parse_guard(src: &str) -> Result<SGuard, SyntaxError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        scope: Vec::new(),
    };
    let g = p.guard()?;
    if p.peek() != &Tok::Eof {
        return p.error("end of input");
    }
    Ok(g)
}

/// Parse a term; identifiers in `vars` are read as variables.
pub fn parse_term(src: &str, vars: &[&str]) -> Result<STerm, SyntaxError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        scope: vars.iter().map(|v| v.to_string()).collect(),
    };
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return p.error("end of input");
    }
    Ok(t)
}
