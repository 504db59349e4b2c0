//! Text syntax for terms, equations, and Horn formula files.
//!
//! Term grammar, loosest binding first:
//!
//! ```text
//! sum     := cat ('+' cat)*
//! cat     := unary ((';')? unary)*         juxtaposition also composes
//! unary   := '!' unary | '~' unary | primary '*'*
//! primary := '0' | '1' | ident | '(' sum ')'
//! ident   := [a-z][a-z0-9_]*
//! ```
//!
//! An equation is `term = term` or `term <= term`. A Horn formula file is
//! line oriented: `program` and `test` lines declare symbols, `hyp` lines add
//! hypotheses, and exactly one `show` line gives the conclusion. `#` starts a
//! comment anywhere. Declarations may appear on any line of the file; the
//! equations are resolved against the complete set.

use std::fmt;

use thiserror::Error;

use crate::term::{Equation, HornFormula, Relation, Signature, Symbol, SymbolKind, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Zero,
    One,
    Ident(String),
    Plus,
    Semi,
    Star,
    Bang,
    LParen,
    RParen,
    Equal,
    LessEq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Zero => write!(f, "`0`"),
            Tok::One => write!(f, "`1`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Equal => write!(f, "`=`"),
            Tok::LessEq => write!(f, "`<=`"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str, start_line: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = start_line;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let here = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '0' => simple(&mut chars, &mut col, &mut out, Tok::Zero, here),
            '1' => simple(&mut chars, &mut col, &mut out, Tok::One, here),
            '+' => simple(&mut chars, &mut col, &mut out, Tok::Plus, here),
            ';' => simple(&mut chars, &mut col, &mut out, Tok::Semi, here),
            '*' => simple(&mut chars, &mut col, &mut out, Tok::Star, here),
            '!' | '~' => simple(&mut chars, &mut col, &mut out, Tok::Bang, here),
            '(' => simple(&mut chars, &mut col, &mut out, Tok::LParen, here),
            ')' => simple(&mut chars, &mut col, &mut out, Tok::RParen, here),
            '=' => simple(&mut chars, &mut col, &mut out, Tok::Equal, here),
            '<' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    out.push(Spanned { tok: Tok::LessEq, line: here.0, col: here.1 });
                } else {
                    return Err(ParseError::new(here.0, here.1, "expected `<=`"));
                }
            }
            c if c.is_ascii_lowercase() => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(name), line: here.0, col: here.1 });
            }
            c => {
                return Err(ParseError::new(here.0, here.1, format!("unexpected character `{c}`")))
            }
        }
    }
    Ok(out)
}

fn simple(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    col: &mut usize,
    out: &mut Vec<Spanned>,
    tok: Tok,
    here: (usize, usize),
) {
    chars.next();
    *col += 1;
    out.push(Spanned { tok, line: here.0, col: here.1 });
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: &'a Signature,
    // Position reported for errors at end of input.
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<Spanned>, sig: &'a Signature, end: (usize, usize)) -> Self {
        Parser { toks, pos: 0, sig, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {want}, found {t}"))),
            None => Err(self.error(format!("expected {want}, found end of input"))),
        }
    }

    fn starts_unary(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Zero | Tok::One | Tok::Ident(_) | Tok::Bang | Tok::LParen)
        )
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.cat()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            acc = Term::plus(acc, self.cat()?);
        }
        Ok(acc)
    }

    fn cat(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.peek() == Some(&Tok::Semi) {
                self.pos += 1;
                acc = Term::dot(acc, self.unary()?);
            } else if self.starts_unary() {
                acc = Term::dot(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Bang) {
            let here = self.here();
            self.pos += 1;
            let inner = self.unary()?;
            return Term::not(inner).map_err(|e| ParseError::new(here.0, here.1, e.to_string()));
        }
        let mut acc = self.primary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = Term::star(acc);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let here = self.here();
        match self.bump() {
            Some(Tok::Zero) => Ok(Term::Zero),
            Some(Tok::One) => Ok(Term::One),
            Some(Tok::Ident(name)) => match self.sig.kind_of(&name) {
                Some(SymbolKind::Program) => Ok(Term::Prog(Symbol::program(name))),
                Some(SymbolKind::Test) => Ok(Term::Test(Symbol::test(name))),
                None => {
                    Err(ParseError::new(here.0, here.1, format!("undeclared symbol `{name}`")))
                }
            },
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(ParseError::new(here.0, here.1, format!("expected a term, found {t}"))),
            None => Err(ParseError::new(here.0, here.1, "expected a term, found end of input")),
        }
    }

    fn equation(&mut self) -> Result<Equation, ParseError> {
        let lhs = self.sum()?;
        let relation = match self.peek() {
            Some(Tok::Equal) => Relation::Eq,
            Some(Tok::LessEq) => Relation::Leq,
            _ => return Err(self.error("expected `=` or `<=`")),
        };
        self.pos += 1;
        let rhs = self.sum()?;
        Ok(Equation { lhs, rhs, relation })
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected {t}"))),
        }
    }
}

fn end_of(text: &str, start_line: usize) -> (usize, usize) {
    let mut line = start_line;
    let mut col = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Parses a single term; identifiers are resolved against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(lex(text, 1)?, sig, end_of(text, 1));
    let t = p.sum()?;
    p.finish()?;
    Ok(t)
}

/// Parses `term = term` or `term <= term`.
pub fn parse_equation(text: &str, sig: &Signature) -> Result<Equation, ParseError> {
    let mut p = Parser::new(lex(text, 1)?, sig, end_of(text, 1));
    let eq = p.equation()?;
    p.finish()?;
    Ok(eq)
}

fn parse_equation_at(text: &str, line: usize, col0: usize, sig: &Signature) -> Result<Equation, ParseError> {
    let toks = lex(text, line)?;
    let toks = toks
        .into_iter()
        .map(|mut s| {
            if s.line == line {
                s.col += col0;
            }
            s
        })
        .collect();
    let mut end = end_of(text, line);
    if end.0 == line {
        end.1 += col0;
    }
    let mut p = Parser::new(toks, sig, end);
    let eq = p.equation()?;
    p.finish()?;
    Ok(eq)
}

/// Parses a Horn formula file.
pub fn parse_horn(text: &str) -> Result<HornFormula, ParseError> {
    struct Line<'t> {
        number: usize,
        directive: &'t str,
        rest: &'t str,
        rest_col: usize,
    }

    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no_comment = raw.split('#').next().unwrap_or("");
        let trimmed = no_comment.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (directive, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim_start()),
            None => (trimmed, ""),
        };
        // Where `rest` starts in the raw line, for error positions.
        let rest_col = if rest.is_empty() {
            no_comment.len()
        } else {
            rest.as_ptr() as usize - no_comment.as_ptr() as usize
        };
        lines.push(Line { number: idx + 1, directive, rest, rest_col });
    }

    // Declarations first, wherever they appear in the file.
    let mut sig = Signature::new();
    for line in &lines {
        let declare: Option<fn(&mut Signature, &str) -> Result<(), crate::term::TermError>> =
            match line.directive {
                "program" => Some(|s, n| s.declare_program(n)),
                "test" => Some(|s, n| s.declare_test(n)),
                _ => None,
            };
        if let Some(declare) = declare {
            if line.rest.is_empty() {
                return Err(ParseError::new(line.number, 1, "expected at least one name"));
            }
            for name in line.rest.split_whitespace() {
                if !name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
                    || !name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                {
                    return Err(ParseError::new(
                        line.number,
                        1,
                        format!("invalid symbol name `{name}`"),
                    ));
                }
                declare(&mut sig, name)
                    .map_err(|e| ParseError::new(line.number, 1, e.to_string()))?;
            }
        }
    }

    let mut hypotheses = Vec::new();
    let mut conclusion = None;
    for line in &lines {
        match line.directive {
            "program" | "test" => {}
            "hyp" => {
                hypotheses.push(parse_equation_at(line.rest, line.number, line.rest_col, &sig)?)
            }
            "show" => {
                let eq = parse_equation_at(line.rest, line.number, line.rest_col, &sig)?;
                if conclusion.replace(eq).is_some() {
                    return Err(ParseError::new(line.number, 1, "more than one `show` line"));
                }
            }
            other => {
                return Err(ParseError::new(
                    line.number,
                    1,
                    format!("unknown directive `{other}` (expected program, test, hyp, or show)"),
                ))
            }
        }
    }

    let conclusion = conclusion
        .ok_or_else(|| ParseError::new(lines.last().map_or(1, |l| l.number), 1, "missing `show` line"))?;
    HornFormula::new(sig, hypotheses, conclusion)
        .map_err(|e| ParseError::new(1, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sig() -> Signature {
        Signature::with(&["p", "q"], &["b", "c"])
    }

    #[test]
    fn precedence_and_juxtaposition() {
        let s = sig();
        let t = parse_term("p;q + p", &s).unwrap();
        assert_eq!(t, Term::plus(Term::dot(Term::prog("p"), Term::prog("q")), Term::prog("p")));
        // Juxtaposition with spaces or parentheses composes.
        assert_eq!(parse_term("p q p", &s).unwrap(), parse_term("p;q;p", &s).unwrap());
        assert_eq!(parse_term("b(p + q)", &s).unwrap(), parse_term("b;(p + q)", &s).unwrap());
        // Star binds tighter than composition and negation.
        assert_eq!(
            parse_term("p q*", &s).unwrap(),
            Term::dot(Term::prog("p"), Term::star(Term::prog("q")))
        );
        assert_eq!(parse_term("p**", &s).unwrap(), Term::star(Term::star(Term::prog("p"))));
        assert_eq!(
            parse_term("!b;c", &s).unwrap(),
            Term::dot(Term::not(Term::test("b")).unwrap(), Term::test("c"))
        );
        assert_eq!(parse_term("~b", &s).unwrap(), parse_term("!b", &s).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let s = sig();
        assert!(parse_term("p +", &s).is_err());
        assert!(parse_term("(p", &s).is_err());
        assert!(parse_term("r", &s).is_err(), "undeclared symbol");
        assert!(parse_term("!p", &s).is_err(), "negation of a program");
        assert!(parse_term("!b*", &s).is_err(), "negation of a starred test");
        assert!(parse_term("p < q", &s).is_err());
        let err = parse_term("p;\nq)", &s).unwrap_err();
        assert_eq!((err.line, err.col), (2, 2));
    }

    #[test]
    fn parses_horn_files() {
        let text = "\
# the motivating example
program p
test b
hyp p;b = p
hyp b;p = b   # second hypothesis
show p;p = p
";
        let f = parse_horn(text).unwrap();
        assert_eq!(f.hypotheses.len(), 2);
        assert_eq!(f.conclusion, Equation::eq(Term::dot(Term::prog("p"), Term::prog("p")), Term::prog("p")));
        // Display output re-parses to the same formula.
        assert_eq!(parse_horn(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn horn_file_errors() {
        assert!(parse_horn("program p\n").is_err(), "missing show");
        assert!(parse_horn("program p\nshow p = p\nshow p = p\n").is_err());
        assert!(parse_horn("program p\nshow p = q\n").is_err(), "undeclared");
        assert!(parse_horn("prog p\nshow p = p\n").is_err(), "bad directive");
        assert!(parse_horn("program p\ntest p\nshow p = p\n").is_err(), "kind clash");
        let err = parse_horn("program p\nhyp p = \nshow p = p\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn display_parse_round_trip_on_random_terms() {
        let s = sig();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20705);
        for _ in 0..500 {
            let t = crate::gen::random_term(&mut rng, &s, 10, true);
            let printed = t.to_string();
            let back = parse_term(&printed, &s)
                .unwrap_or_else(|e| panic!("`{printed}` failed to re-parse: {e}"));
            assert_eq!(back, t, "round trip through `{printed}`");
        }
    }
}
