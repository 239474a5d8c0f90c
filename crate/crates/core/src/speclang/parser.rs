use std::collections::BTreeMap;

use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;
use crate::analysis_sets::AnalysisSet;
use crate::dgp::ENDPOINT_SCALE;
use crate::estimand::{Endpoint, EstimandSpec, IceKind, Population, Strategy, Summary};
use crate::potential_outcomes::{Assessment, PrincipalStratum};

/// Scale of a known endpoint.
pub fn endpoint_scale(name: &str) -> Option<(f64, f64)> {
    match name {
        "disability" => Some(ENDPOINT_SCALE),
        _ => None,
    }
}

const FIELDS: [&str; 5] = ["treatment", "endpoint", "population", "summary", "ice"];
const STRATEGIES: [&str; 6] = [
    "treatment_policy",
    "hypothetical",
    "while_on_treatment",
    "composite",
    "principal_stratum",
    "confounder",
];

fn quote(s: &str) -> String {
    format!("`{s}`")
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

/// Position of a token kept for checks that need the whole estimand.
#[derive(Clone, Copy)]
struct Pos(usize, usize);

impl Pos {
    fn of(t: &Token) -> Self {
        Pos(t.line, t.column)
    }

    fn error(self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.0, self.1, message)
    }
}

struct IceClause {
    strategy: Strategy,
    /// Position of the strategy name.
    at: Pos,
    /// Position of the composite worst value.
    worst_at: Option<Pos>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[String]) -> PResult<T> {
        let t = self.peek();
        Err(ParseError {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.kind.describe()),
            expected: expected.to_vec(),
        })
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            self.unexpected(&[kind.describe()])
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Token> {
        match &self.peek().kind {
            TokenKind::Ident(s) if s == word => Ok(self.next()),
            _ => self.unexpected(&[quote(word)]),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Token)> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next()))
            }
            _ => self.unexpected(&[what.to_string()]),
        }
    }

    /// Identifier drawn from a closed set.
    fn one_of(&mut self, words: &[&str]) -> PResult<(String, Token)> {
        match &self.peek().kind {
            TokenKind::Ident(s) if words.contains(&s.as_str()) => {
                let s = s.clone();
                Ok((s, self.next()))
            }
            _ => self.unexpected(&words.iter().map(|w| quote(w)).collect::<Vec<_>>()),
        }
    }

    fn number(&mut self) -> PResult<(f64, Token)> {
        match self.peek().kind {
            TokenKind::Number(v) => Ok((v, self.next())),
            _ => self.unexpected(&["number".to_string()]),
        }
    }

    fn strategy(&mut self, kind: IceKind) -> PResult<IceClause> {
        let (name, tok) = self.one_of(&STRATEGIES)?;
        let at = Pos::of(&tok);
        let mut worst_at = None;
        let strategy = match name.as_str() {
            "treatment_policy" => Strategy::TreatmentPolicy,
            "hypothetical" => Strategy::Hypothetical,
            "while_on_treatment" => Strategy::WhileOnTreatment,
            "composite" => {
                self.expect(TokenKind::LParen)?;
                self.keyword("worst")?;
                self.expect(TokenKind::Equals)?;
                let (worst, wt) = self.number()?;
                worst_at = Some(Pos::of(&wt));
                self.expect(TokenKind::RParen)?;
                Strategy::Composite { worst }
            }
            "principal_stratum" => {
                if kind != IceKind::Withdrawal {
                    return Err(at.error(format!(
                        "principal_stratum applies only to withdrawal, not {kind}"
                    )));
                }
                self.expect(TokenKind::LParen)?;
                let (s, st) = self.ident("stratum name")?;
                let stratum = PrincipalStratum::from_name(&s)
                    .ok_or_else(|| Pos::of(&st).error(format!("unknown principal stratum `{s}`")))?;
                if stratum != PrincipalStratum::P1 {
                    return Err(Pos::of(&st).error(format!(
                        "principal_stratum supports only P1 (tolerate_both), not {s}"
                    )));
                }
                self.expect(TokenKind::RParen)?;
                Strategy::PrincipalStratum(stratum)
            }
            "confounder" => {
                if kind != IceKind::ConcomitantTherapy {
                    return Err(at.error(format!(
                        "confounder applies only to concomitant_therapy, not {kind}"
                    )));
                }
                Strategy::Confounder
            }
            _ => unreachable!("one_of only returns listed strategies"),
        };
        Ok(IceClause { strategy, at, worst_at })
    }

    fn population(&mut self) -> PResult<Population> {
        let (word, tok) = self.ident("population (`all`, `stratum(...)` or an analysis set)")?;
        if word == "all" {
            return Ok(Population::All);
        }
        if word == "stratum" {
            self.expect(TokenKind::LParen)?;
            let (s, st) = self.ident("stratum name")?;
            let stratum = PrincipalStratum::from_name(&s)
                .ok_or_else(|| Pos::of(&st).error(format!("unknown principal stratum `{s}`")))?;
            self.expect(TokenKind::RParen)?;
            return Ok(Population::Stratum(stratum));
        }
        AnalysisSet::from_name(&word).map(Population::AnalysisSet).ok_or_else(|| ParseError {
            line: tok.line,
            column: tok.column,
            message: format!("unknown population `{word}`"),
            expected: ["`all`", "`stratum`", "`itts`", "`ss`", "`fas`", "`pps`"].map(String::from).to_vec(),
        })
    }

    fn estimand(&mut self) -> PResult<EstimandSpec> {
        self.keyword("estimand")?;
        let name = match &self.peek().kind {
            TokenKind::Quoted(s) => {
                let s = s.clone();
                self.next();
                s
            }
            _ => return self.unexpected(&["quoted estimand name".to_string()]),
        };
        self.expect(TokenKind::LBrace)?;

        let mut treatment = None;
        let mut endpoint: Option<(Endpoint, Pos)> = None;
        let mut population = None;
        let mut summary = None;
        let mut ice: BTreeMap<IceKind, IceClause> = BTreeMap::new();
        let mut any_field = false;

        let close = loop {
            let t = self.peek().clone();
            let field = match &t.kind {
                TokenKind::Ident(s) if FIELDS.contains(&s.as_str()) => s.clone(),
                TokenKind::RBrace if any_field => break self.next(),
                _ => {
                    let mut exp: Vec<String> = FIELDS.iter().map(|f| quote(f)).collect();
                    if any_field {
                        exp.push("`}`".into());
                    }
                    return self.unexpected(&exp);
                }
            };
            self.next();
            any_field = true;
            let duplicate = || Pos::of(&t).error(format!("duplicate field `{field}`"));
            match field.as_str() {
                "treatment" => {
                    if treatment.is_some() {
                        return Err(duplicate());
                    }
                    self.expect(TokenKind::Colon)?;
                    let (exp, _) = self.ident("experimental arm identifier")?;
                    self.keyword("vs")?;
                    let (ctl, ct) = self.ident("control arm identifier")?;
                    if exp == ctl {
                        return Err(Pos::of(&ct).error(format!("both arms are `{ctl}`; treatments must differ")));
                    }
                    treatment = Some((exp, ctl));
                }
                "endpoint" => {
                    if endpoint.is_some() {
                        return Err(duplicate());
                    }
                    self.expect(TokenKind::Colon)?;
                    let (name, nt) = self.ident("endpoint name")?;
                    if endpoint_scale(&name).is_none() {
                        return Err(ParseError {
                            line: nt.line,
                            column: nt.column,
                            message: format!("unknown endpoint `{name}`"),
                            expected: vec![quote("disability")],
                        });
                    }
                    self.expect(TokenKind::At)?;
                    let (at, _) = self.one_of(&["t1", "t2"])?;
                    let at = if at == "t1" { Assessment::T1 } else { Assessment::T2 };
                    endpoint = Some((Endpoint { name, at }, Pos::of(&nt)));
                }
                "population" => {
                    if population.is_some() {
                        return Err(duplicate());
                    }
                    self.expect(TokenKind::Colon)?;
                    population = Some(self.population()?);
                }
                "summary" => {
                    if summary.is_some() {
                        return Err(duplicate());
                    }
                    self.expect(TokenKind::Colon)?;
                    self.one_of(&["mean_difference"])?;
                    summary = Some(Summary::MeanDifference);
                }
                "ice" => {
                    let names: Vec<&str> = IceKind::ALL.iter().map(|k| k.as_str()).collect();
                    let (kind_name, kt) = self.one_of(&names)?;
                    let kind = IceKind::from_name(&kind_name).unwrap();
                    if ice.contains_key(&kind) {
                        return Err(Pos::of(&kt).error(format!("duplicate ice clause for `{kind}`")));
                    }
                    self.expect(TokenKind::Colon)?;
                    let clause = self.strategy(kind)?;
                    ice.insert(kind, clause);
                }
                _ => unreachable!("field names are checked above"),
            }
        };

        let end = Pos::of(&close);
        let missing = |f: &str| end.error(format!("estimand \"{name}\" is missing required field `{f}`"));
        let treatment = treatment.ok_or_else(|| missing("treatment"))?;
        let (endpoint, _) = endpoint.ok_or_else(|| missing("endpoint"))?;
        let population = population.ok_or_else(|| missing("population"))?;
        let summary = summary.ok_or_else(|| missing("summary"))?;

        let scale = endpoint_scale(&endpoint.name).expect("endpoint checked when parsed");
        for clause in ice.values() {
            match clause.strategy {
                Strategy::Composite { worst } => {
                    let at = clause.worst_at.expect("composite records its value position");
                    if worst > scale.1 {
                        return Err(at.error(format!("worst exceeds endpoint scale: {worst} > {}", scale.1)));
                    }
                    if worst < scale.0 {
                        return Err(at.error(format!("worst below endpoint scale: {worst} < {}", scale.0)));
                    }
                }
                Strategy::PrincipalStratum(s) if population != Population::Stratum(s) => {
                    return Err(clause.at.error(format!(
                        "principal_stratum requires population: stratum({})",
                        s.long_name()
                    )));
                }
                _ => {}
            }
        }

        Ok(EstimandSpec {
            name,
            treatment,
            endpoint,
            population,
            summary,
            ice_policies: ice.into_iter().map(|(k, c)| (k, c.strategy)).collect(),
        })
    }
}

/// Parses every estimand in `source`.
pub fn parse_spec(source: &str) -> Result<Vec<EstimandSpec>, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut specs = vec![p.estimand()?];
    while p.peek().kind != TokenKind::Eof {
        specs.push(p.estimand()?);
    }
    Ok(specs)
}
