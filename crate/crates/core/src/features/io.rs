//! Text serialization of feature sets with their weights (`.feat` files).
//!
//! One feature per line, tab-separated fields:
//!
//! ```text
//! w=<decimal>  from=<walk|->  to=<walk>  pat=<elem>@<walk>(,<elem>@<walk>)*
//! ```
//!
//! with walk `[]` or `[t1;t2;…]`, turns as exact rationals `p/q` or `0`, and
//! elements `off`, `empty`, `friend`, `enemy`, `own<N>`, `item<N>`. Weights
//! use the shortest round-trip decimal form.

use std::fmt::Write as _;

use thiserror::Error;

use crate::board::{Turn, Walk};
use crate::features::{Element, Feature, FeatureSet};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FeatParseError {
    pub line: usize,
    pub msg: String,
}

fn element_token(e: Element) -> String {
    match e {
        Element::OffBoard => "off".into(),
        Element::Empty => "empty".into(),
        Element::Friendly => "friend".into(),
        Element::Enemy => "enemy".into(),
        Element::OwnedBy(n) => format!("own{n}"),
        Element::ItemIndex(n) => format!("item{n}"),
    }
}

/// Serializes the set with its aligned weight vector.
pub fn serialize_feature_set(features: &FeatureSet, weights: &[f64]) -> String {
    assert_eq!(features.len(), weights.len(), "weights must align with features");
    let mut out = String::new();
    for (f, w) in features.iter().zip(weights) {
        let from = match f.action_from() {
            None => "-".to_string(),
            Some(walk) => walk.to_string(),
        };
        let pat = f
            .pattern()
            .iter()
            .map(|(walk, e)| format!("{}@{}", element_token(*e), walk))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "w={w}\tfrom={from}\tto={}\tpat={pat}", f.action_to()).unwrap();
    }
    out
}

fn parse_turn(text: &str, line: usize) -> Result<Turn, FeatParseError> {
    let err = |msg: String| FeatParseError { line, msg };
    if text == "0" {
        return Ok(Turn::zero());
    }
    let (p, q) = text
        .split_once('/')
        .ok_or_else(|| err(format!("bad turn `{text}`")))?;
    let p: i64 = p.parse().map_err(|_| err(format!("bad turn numerator `{p}`")))?;
    let q: i64 = q.parse().map_err(|_| err(format!("bad turn denominator `{q}`")))?;
    if q <= 0 || p < 0 || p >= q {
        return Err(err(format!("turn `{text}` is not in [0, 1)")));
    }
    Ok(Turn::new(p, q))
}

fn parse_walk(text: &str, line: usize) -> Result<Walk, FeatParseError> {
    let err = |msg: String| FeatParseError { line, msg };
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| err(format!("bad walk `{text}`")))?;
    if inner.is_empty() {
        return Ok(Walk::empty());
    }
    let turns = inner
        .split(';')
        .map(|t| parse_turn(t, line))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Walk(turns))
}

fn parse_element(text: &str, line: usize) -> Result<Element, FeatParseError> {
    let err = |msg: String| FeatParseError { line, msg };
    match text {
        "off" => Ok(Element::OffBoard),
        "empty" => Ok(Element::Empty),
        "friend" => Ok(Element::Friendly),
        "enemy" => Ok(Element::Enemy),
        _ => {
            if let Some(n) = text.strip_prefix("own") {
                let n: u8 = n.parse().map_err(|_| err(format!("bad element `{text}`")))?;
                Ok(Element::OwnedBy(n))
            } else if let Some(n) = text.strip_prefix("item") {
                let n: u8 = n.parse().map_err(|_| err(format!("bad element `{text}`")))?;
                Ok(Element::ItemIndex(n))
            } else {
                Err(err(format!("bad element `{text}`")))
            }
        }
    }
}

fn field<'a>(text: &'a str, name: &str, line: usize) -> Result<&'a str, FeatParseError> {
    text.strip_prefix(name)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| FeatParseError { line, msg: format!("expected field `{name}=`, found `{text}`") })
}

/// Parses a `.feat` file back into a set and aligned weights.
pub fn parse_feature_set(text: &str) -> Result<(FeatureSet, Vec<f64>), FeatParseError> {
    let mut features = FeatureSet::new();
    let mut weights = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let err = |msg: String| FeatParseError { line, msg };
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let weight: f64 = field(fields[0], "w", line)?
            .parse()
            .map_err(|_| err(format!("bad weight `{}`", fields[0])))?;
        if !weight.is_finite() {
            return Err(err("weights must be finite".into()));
        }
        let from_text = field(fields[1], "from", line)?;
        let action_from = if from_text == "-" {
            None
        } else {
            Some(parse_walk(from_text, line)?)
        };
        let action_to = parse_walk(field(fields[2], "to", line)?, line)?;
        let pat_text = field(fields[3], "pat", line)?;
        let mut pattern = Vec::new();
        if !pat_text.is_empty() {
            for req in pat_text.split(',') {
                let (elem, walk) = req
                    .split_once('@')
                    .ok_or_else(|| err(format!("bad requirement `{req}`")))?;
                pattern.push((parse_walk(walk, line)?, parse_element(elem, line)?));
            }
        }
        let feature = Feature::new(action_from, action_to, pattern)
            .ok_or_else(|| err("conflicting requirements on one walk".into()))?;
        if features.push_unique(feature).is_none() {
            return Err(err("duplicate feature".into()));
        }
        weights.push(weight);
    }
    Ok((features, weights))
}
