// SPDX-License-Identifier: Apache-2.0

//! Factorization certificates obtained from an external computer algebra
//! system and checked locally.
//!
//! A query runs through four named stages:
//! [`matcher`] accepts the goal, [`reify`] renders it as a query,
//! [`convert`] parses the response, and [`validator`] re-checks the result
//! with local arithmetic. Only the validator's verdict is trusted.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::arith;
use crate::Int;

/// Primality above this bound is not decided by the validator.
pub const PRIMALITY_BOUND: u128 = 3_317_044_064_679_887_385_961_981;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    Empty,
    ExponentNotPositive { index: usize },
    NotIncreasing { index: usize },
    NotPrime(Int),
    PrimalityUndecided(Int),
    ProductMismatch { product: Option<Int> },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "empty factor list"),
            Self::ExponentNotPositive { index } => write!(f, "exponent of factor {index} is not positive"),
            Self::NotIncreasing { index } => write!(f, "factor {index} does not exceed its predecessor"),
            Self::NotPrime(p) => write!(f, "{p} is not prime"),
            Self::PrimalityUndecided(p) => write!(f, "{p} is beyond the deterministic primality range"),
            Self::ProductMismatch { product: Some(p) } => write!(f, "product is {p}"),
            Self::ProductMismatch { product: None } => write!(f, "product exceeds n"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Matcher,
    Reify,
    Transport,
    Convert,
    Validator,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Matcher => "matcher",
            Self::Reify => "reify",
            Self::Transport => "transport",
            Self::Convert => "convert",
            Self::Validator => "validator",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("matcher: factorization queries need n >= 2, got {0}")]
    OutOfRange(Int),
    #[error("transport: {0}")]
    Transport(String),
    #[error("fixture {path}: first line {found:?} does not match query {expected:?}")]
    QueryMismatch { path: PathBuf, expected: String, found: String },
    #[error("convert: {0}")]
    Parse(#[from] ParseError),
    #[error("validator: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<Rejection>),
}

impl CertifyError {
    pub fn stage(&self) -> Stage {
        match self {
            Self::OutOfRange(_) => Stage::Matcher,
            Self::Transport(_) | Self::QueryMismatch { .. } => Stage::Transport,
            Self::Parse(_) => Stage::Convert,
            Self::Rejected(_) => Stage::Validator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationCertificate {
    pub n: Int,
    pub factors: Vec<(Int, u32)>,
}

impl FactorizationCertificate {
    /// `[(p, e), ...]` in the response grammar.
    pub fn render(&self) -> String {
        render_factor_list(&self.factors)
    }
}

pub fn render_factor_list(factors: &[(Int, u32)]) -> String {
    let parts: Vec<String> = factors.iter().map(|(p, e)| format!("({p}, {e})")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn render_factor_query(n: &Int) -> Result<String, CertifyError> {
    if n < &Int::from(2) {
        return Err(CertifyError::OutOfRange(n.clone()));
    }
    Ok(format!("print(list(ZZ({n}).factor()))"))
}

struct ResponseParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ResponseParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws();
        match self.src.get(self.pos) {
            Some(&b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            Some(&b) => self.err(format!("expected '{}', found '{}'", c as char, b as char)),
            None => self.err(format!("expected '{}', found end of input", c as char)),
        }
    }

    fn int(&mut self) -> Result<Int, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return self.err("expected a nonnegative integer");
        }
        if self.src[start] == b'0' && self.pos - start > 1 {
            self.pos = start;
            return self.err("leading zero");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digit string"))
    }

    fn pair(&mut self) -> Result<(Int, Int), ParseError> {
        self.expect(b'(')?;
        let p = self.int()?;
        self.expect(b',')?;
        let e = self.int()?;
        self.expect(b')')?;
        Ok((p, e))
    }
}

/// Parse `'[' pair (',' pair)* ']'`, `pair = '(' int ',' int ')'`, whitespace anywhere between tokens.
pub fn parse_factor_response(s: &str) -> Result<Vec<(Int, Int)>, ParseError> {
    let mut p = ResponseParser { src: s.as_bytes(), pos: 0 };
    p.expect(b'[')?;
    let mut out = vec![p.pair()?];
    loop {
        p.skip_ws();
        match p.src.get(p.pos) {
            Some(b',') => {
                p.pos += 1;
                out.push(p.pair()?);
            }
            Some(b']') => {
                p.pos += 1;
                break;
            }
            Some(&b) => return p.err(format!("expected ',' or ']', found '{}'", b as char)),
            None => return p.err("expected ',' or ']', found end of input"),
        }
    }
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing characters");
    }
    Ok(out)
}

/// Check product, strict monotonicity and primality; every failure is reported.
pub fn verify_certificate(n: &Int, factors: &[(Int, Int)]) -> Result<FactorizationCertificate, Vec<Rejection>> {
    let mut reasons = Vec::new();
    if factors.is_empty() {
        reasons.push(Rejection::Empty);
    }
    let bits = n.bits();
    let mut product = Some(Int::one());
    let mut exps = Vec::with_capacity(factors.len());
    for (i, (p, e)) in factors.iter().enumerate() {
        let e = e.to_u32().filter(|&e| e >= 1);
        if e.is_none() {
            reasons.push(Rejection::ExponentNotPositive { index: i });
        }
        if i > 0 && p <= &factors[i - 1].0 {
            reasons.push(Rejection::NotIncreasing { index: i });
        }
        if p < &Int::from(2) {
            reasons.push(Rejection::NotPrime(p.clone()));
        } else if p <= n {
            if p >= &Int::from(PRIMALITY_BOUND) {
                reasons.push(Rejection::PrimalityUndecided(p.clone()));
            } else if !arith::is_prime(p) {
                reasons.push(Rejection::NotPrime(p.clone()));
            }
        }
        product = match (product, e) {
            (Some(acc), Some(e)) if u64::from(e) <= bits && p <= n => Some(acc * p.pow(e)).filter(|v| v <= n),
            _ => None,
        };
        exps.push(e.unwrap_or(0));
    }
    if product.as_ref() != Some(n) {
        reasons.push(Rejection::ProductMismatch { product });
    }
    if reasons.is_empty() {
        let factors = factors.iter().map(|(p, _)| p.clone()).zip(exps).collect();
        Ok(FactorizationCertificate { n: n.clone(), factors })
    } else {
        Err(reasons)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Fixture(PathBuf),
    Live(String),
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalExchange {
    pub query: String,
    pub raw_response: String,
    pub source: Source,
}

impl ExternalExchange {
    /// Fixture file contents pinning this exchange.
    pub fn to_fixture(&self) -> String {
        format!("{}\n{}\n", self.query, self.raw_response.trim_end())
    }
}

pub trait Transport {
    fn exchange(&self, query: &str) -> Result<ExternalExchange, CertifyError>;
}

/// Replays a file whose first line is the query and whose remaining lines are the response.
pub struct FixtureTransport {
    pub path: PathBuf,
}

impl FixtureTransport {
    pub fn new(path: impl AsRef<Path>) -> Self {
        Self { path: path.as_ref().to_path_buf() }
    }
}

impl Transport for FixtureTransport {
    fn exchange(&self, query: &str) -> Result<ExternalExchange, CertifyError> {
        let text = fs::read_to_string(&self.path)
            .map_err(|e| CertifyError::Transport(format!("{}: {e}", self.path.display())))?;
        let (first, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        let first = first.trim_end_matches('\r');
        if first != query {
            return Err(CertifyError::QueryMismatch {
                path: self.path.clone(),
                expected: query.to_string(),
                found: first.to_string(),
            });
        }
        Ok(ExternalExchange {
            query: query.to_string(),
            raw_response: rest.to_string(),
            source: Source::Fixture(self.path.clone()),
        })
    }
}

/// Environment variable naming the default live endpoint.
pub const ENDPOINT_ENV: &str = "QDESCENT_CAS_ENDPOINT";

/// Plain HTTP POST of the query text; the response body is the raw response.
pub struct LiveTransport {
    pub endpoint: String,
    pub timeout: Duration,
}

impl LiveTransport {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), timeout: Duration::from_secs(30) }
    }
}

impl Transport for LiveTransport {
    fn exchange(&self, query: &str) -> Result<ExternalExchange, CertifyError> {
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let raw_response = agent
            .post(&self.endpoint)
            .set("Content-Type", "text/plain")
            .send_string(query)
            .map_err(|e| CertifyError::Transport(e.to_string()))?
            .into_string()
            .map_err(|e| CertifyError::Transport(e.to_string()))?;
        Ok(ExternalExchange {
            query: query.to_string(),
            raw_response,
            source: Source::Live(self.endpoint.clone()),
        })
    }
}

/// Answers queries with the local factorizer, printing in the external grammar.
pub struct LocalTransport;

impl Transport for LocalTransport {
    fn exchange(&self, query: &str) -> Result<ExternalExchange, CertifyError> {
        let n = query
            .strip_prefix("print(list(ZZ(")
            .and_then(|s| s.strip_suffix(").factor()))"))
            .and_then(|s| s.parse::<Int>().ok())
            .ok_or_else(|| CertifyError::Transport(format!("unrecognised query {query:?}")))?;
        let factors = arith::factor(&n).map_err(|e| CertifyError::Transport(e.to_string()))?;
        Ok(ExternalExchange {
            query: query.to_string(),
            raw_response: render_factor_list(&factors),
            source: Source::Local,
        })
    }
}

pub fn matcher(n: &Int) -> Result<Int, CertifyError> {
    if n < &Int::from(2) {
        Err(CertifyError::OutOfRange(n.clone()))
    } else {
        Ok(n.clone())
    }
}

pub fn reify(n: &Int) -> Result<String, CertifyError> {
    render_factor_query(n)
}

pub fn convert(exchange: &ExternalExchange) -> Result<Vec<(Int, Int)>, CertifyError> {
    Ok(parse_factor_response(&exchange.raw_response)?)
}

pub fn validator(n: &Int, factors: &[(Int, Int)]) -> Result<FactorizationCertificate, CertifyError> {
    verify_certificate(n, factors).map_err(CertifyError::Rejected)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedFactorization {
    pub exchange: ExternalExchange,
    pub certificate: FactorizationCertificate,
}

/// Run all four stages against a transport.
pub fn certify_factorization(n: &Int, transport: &dyn Transport) -> Result<CertifiedFactorization, CertifyError> {
    let n = matcher(n)?;
    let query = reify(&n)?;
    let exchange = transport.exchange(&query)?;
    let factors = convert(&exchange)?;
    let certificate = validator(&n, &factors)?;
    Ok(CertifiedFactorization { exchange, certificate })
}
