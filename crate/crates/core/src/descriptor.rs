//! One-line structured-text descriptors.
//!
//! Spaces, functionals, regions, and sequence families are all
//! constructible from comma-separated `key=value` descriptors:
//!
//! ```text
//! kind=euclidean,dim=2
//! f=dist_sq,anchor=(0 1),weight=0.5
//! f=sum,terms=[f=abs;f=indicator,region=[kind=interval,from=(0),to=(1)]]
//! ```
//!
//! Values are atoms, bracketed lists of nested descriptors separated by
//! `;`, or parenthesized coordinate groups. Printing is canonical, so
//! `parse(print(x))` reproduces `x` for everything the library can print.

use crate::error::{Error, Result};

/// A parsed `key=value` value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Atom(String),
    /// Items of a `[a;b;...]` list, raw text per item.
    List(Vec<String>),
    /// A parenthesized coordinate group, raw text including parens.
    Group(String),
}

/// A parsed descriptor: ordered `key=value` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    raw: String,
    pairs: Vec<(String, Value)>,
}

/// Splits `s` on `sep` at bracket depth zero (respecting `[]` and `()`).
fn split_top_level(s: &str, sep: char) -> Result<Vec<String>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' | '(' => {
                depth += 1;
                cur.push(ch);
            }
            ']' | ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::descriptor(format!("unbalanced brackets in `{s}`")));
                }
                cur.push(ch);
            }
            c if c == sep && depth == 0 => {
                parts.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(Error::descriptor(format!("unbalanced brackets in `{s}`")));
    }
    parts.push(cur.trim().to_string());
    Ok(parts)
}

impl Descriptor {
    pub fn parse(text: &str) -> Result<Descriptor> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::descriptor("empty descriptor"));
        }
        let mut pairs = Vec::new();
        for part in split_top_level(trimmed, ',')? {
            if part.is_empty() {
                return Err(Error::descriptor(format!("empty key=value pair in `{trimmed}`")));
            }
            let Some(eq) = part.find('=') else {
                return Err(Error::descriptor(format!("expected key=value, got `{part}`")));
            };
            let key = part[..eq].trim().to_string();
            let val_text = part[eq + 1..].trim();
            if key.is_empty() {
                return Err(Error::descriptor(format!("missing key in `{part}`")));
            }
            let value = if val_text.starts_with('[') {
                if !val_text.ends_with(']') {
                    return Err(Error::descriptor(format!("unterminated list in `{part}`")));
                }
                let inner = &val_text[1..val_text.len() - 1];
                if inner.trim().is_empty() {
                    Value::List(Vec::new())
                } else {
                    Value::List(split_top_level(inner, ';')?)
                }
            } else if val_text.starts_with('(') {
                Value::Group(val_text.to_string())
            } else if val_text.is_empty() {
                return Err(Error::descriptor(format!("missing value for key `{key}`")));
            } else {
                Value::Atom(val_text.to_string())
            };
            pairs.push((key, value));
        }
        Ok(Descriptor { raw: trimmed.to_string(), pairs })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn require(&self, key: &str) -> Result<&Value> {
        self.get(key)
            .ok_or_else(|| Error::descriptor(format!("missing key `{key}` in `{}`", self.raw)))
    }

    pub fn atom(&self, key: &str) -> Result<&str> {
        match self.require(key)? {
            Value::Atom(a) => Ok(a),
            other => Err(Error::descriptor(format!("key `{key}` expects a plain value, got {other:?}"))),
        }
    }

    pub fn opt_atom(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Atom(a)) => Ok(Some(a)),
            Some(other) => Err(Error::descriptor(format!("key `{key}` expects a plain value, got {other:?}"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.atom(key)?, key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.opt_atom(key)?.map(|a| parse_f64(a, key)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let a = self.atom(key)?;
        a.parse::<usize>()
            .map_err(|_| Error::descriptor(format!("key `{key}`: expected nonnegative integer, got `{a}`")))
    }

    /// Items of a bracketed list value.
    pub fn list(&self, key: &str) -> Result<Vec<String>> {
        match self.require(key)? {
            Value::List(items) => Ok(items.clone()),
            Value::Atom(a) => Ok(vec![a.clone()]),
            other => Err(Error::descriptor(format!("key `{key}` expects a [list], got {other:?}"))),
        }
    }

    /// Raw parenthesized coordinate text.
    pub fn group(&self, key: &str) -> Result<&str> {
        match self.require(key)? {
            Value::Group(g) => Ok(g),
            Value::Atom(a) => Ok(a),
            other => Err(Error::descriptor(format!("key `{key}` expects coordinates, got {other:?}"))),
        }
    }

    pub fn opt_group(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Group(g)) => Ok(Some(g)),
            Some(Value::Atom(a)) => Ok(Some(a)),
            Some(other) => Err(Error::descriptor(format!("key `{key}` expects coordinates, got {other:?}"))),
        }
    }

    /// A `|`-separated numeric list atom, e.g. `caps=1|1.5`.
    pub fn f64_bar_list(&self, key: &str) -> Result<Vec<f64>> {
        self.atom(key)?
            .split('|')
            .map(|p| parse_f64(p.trim(), key))
            .collect()
    }

    /// A `|`-separated integer list atom, e.g. `legs=1|2`.
    pub fn usize_bar_list(&self, key: &str) -> Result<Vec<usize>> {
        self.atom(key)?
            .split('|')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::descriptor(format!("key `{key}`: expected integer, got `{p}`")))
            })
            .collect()
    }

    /// Errors on keys outside the allowed set; catches typos early.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::descriptor(format!(
                    "unknown key `{k}` in `{}` (allowed: {})",
                    self.raw,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_f64(text: &str, context: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::descriptor(format!("`{context}`: expected a number, got `{text}`")))?;
    if !v.is_finite() {
        return Err(Error::descriptor(format!("`{context}`: number must be finite, got `{text}`")));
    }
    Ok(v)
}

/// Canonical decimal text for a float: shortest representation that
/// round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Parse tree for coordinate text: a flat run of numbers or nested groups.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordNode {
    Leaf(Vec<f64>),
    Branch(Vec<CoordNode>),
}

/// Parses coordinate text such as `(1 2)`, `2`, or `((1 2)(2 0.5))`.
pub fn parse_coord_text(text: &str) -> Result<CoordNode> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::descriptor("empty coordinate text"));
    }
    if !s.starts_with('(') {
        // Bare scalar sugar.
        return Ok(CoordNode::Leaf(vec![parse_f64(s, "coordinate")?]));
    }
    let (node, rest) = parse_group(s)?;
    if !rest.trim().is_empty() {
        return Err(Error::descriptor(format!("trailing text after coordinates: `{rest}`")));
    }
    Ok(node)
}

fn parse_group(s: &str) -> Result<(CoordNode, &str)> {
    let s = s.trim_start();
    let Some(stripped) = s.strip_prefix('(') else {
        return Err(Error::descriptor(format!("expected `(` in coordinates near `{s}`")));
    };
    let mut rest = stripped.trim_start();
    if rest.starts_with('(') {
        let mut children = Vec::new();
        while rest.starts_with('(') {
            let (child, r) = parse_group(rest)?;
            children.push(child);
            rest = r.trim_start();
        }
        let Some(tail) = rest.strip_prefix(')') else {
            return Err(Error::descriptor(format!("expected `)` in coordinates near `{rest}`")));
        };
        Ok((CoordNode::Branch(children), tail))
    } else {
        let close = rest
            .find(')')
            .ok_or_else(|| Error::descriptor(format!("unterminated coordinates near `{rest}`")))?;
        let body = &rest[..close];
        let mut nums = Vec::new();
        for tok in body.split_whitespace() {
            nums.push(parse_f64(tok, "coordinate")?);
        }
        if nums.is_empty() {
            return Err(Error::descriptor("empty coordinate group"));
        }
        Ok((CoordNode::Leaf(nums), &rest[close + 1..]))
    }
}

/// Canonical text for a coordinate tree.
pub fn fmt_coord_node(node: &CoordNode) -> String {
    match node {
        CoordNode::Leaf(nums) => {
            let body: Vec<String> = nums.iter().map(|v| fmt_f64(*v)).collect();
            format!("({})", body.join(" "))
        }
        CoordNode::Branch(children) => {
            let body: String = children.iter().map(fmt_coord_node).collect();
            format!("({body})")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let d = Descriptor::parse("kind=euclidean,dim=2").unwrap();
        assert_eq!(d.atom("kind").unwrap(), "euclidean");
        assert_eq!(d.usize("dim").unwrap(), 2);
    }

    #[test]
    fn parses_nested_lists() {
        let d = Descriptor::parse("f=sum,terms=[f=abs;f=dist_sq,anchor=(1),weight=0.5]").unwrap();
        let items = d.list("terms").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0], "f=abs");
        let inner = Descriptor::parse(&items[1]).unwrap();
        assert_eq!(inner.f64("weight").unwrap(), 0.5);
        assert_eq!(inner.group("anchor").unwrap(), "(1)");
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(Descriptor::parse("f=sum,terms=[f=abs").is_err());
        assert!(Descriptor::parse("x=(1 2").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let d = Descriptor::parse("kind=spider,legz=3").unwrap();
        assert!(d.expect_keys(&["kind", "legs"]).is_err());
    }

    #[test]
    fn coord_trees_round_trip() {
        for text in ["(1 2)", "(-0.5)", "((1 2)(2 0.5))", "(((1)(2))(3 4))"] {
            let node = parse_coord_text(text).unwrap();
            let printed = fmt_coord_node(&node);
            assert_eq!(parse_coord_text(&printed).unwrap(), node);
        }
    }

    #[test]
    fn bare_scalar_coordinate() {
        assert_eq!(parse_coord_text("2").unwrap(), CoordNode::Leaf(vec![2.0]));
    }

    #[test]
    fn shortest_float_text_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), -1e-17, 123456.789] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
