//! Finger-to-chopstick assignments and their pruning rules.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which stick a finger touches: 0 none, 1 upper, 2 lower.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrippingStyle(pub Vec<u8>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// An entry outside {0, 1, 2}.
    BadValue,
    /// The thumb must rest on the upper stick.
    ThumbNotUpper,
    /// A lower-stick finger precedes an upper-stick finger.
    FingerCrossing,
    /// Some stick has no non-thumb finger.
    MissingSupport,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::BadValue => "entries must be 0, 1 or 2",
            Rejection::ThumbNotUpper => "thumb must touch the upper stick",
            Rejection::FingerCrossing => "fingers cross between sticks",
            Rejection::MissingSupport => "each stick needs a non-thumb finger",
        })
    }
}

impl GrippingStyle {
    pub fn new(c: Vec<u8>) -> Self {
        Self(c)
    }

    pub fn finger_count(&self) -> usize {
        self.0.len()
    }

    /// Indices of fingers with a stick assignment.
    pub fn contacting(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, _)| i).collect()
    }

    pub fn validate(&self) -> std::result::Result<(), Rejection> {
        let c = &self.0;
        if c.iter().any(|&v| v > 2) {
            return Err(Rejection::BadValue);
        }
        if c.first() != Some(&1) {
            return Err(Rejection::ThumbNotUpper);
        }
        let rest: Vec<u8> = c[1..].iter().copied().filter(|&v| v != 0).collect();
        if rest.windows(2).any(|w| w[0] == 2 && w[1] == 1) {
            return Err(Rejection::FingerCrossing);
        }
        if !rest.contains(&1) || !rest.contains(&2) {
            return Err(Rejection::MissingSupport);
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Conventional name, if it has one.
    pub fn name(&self) -> Option<&'static str> {
        match self.0.as_slice() {
            [1, 1, 1, 2, 0] => Some("standard"),
            [1, 1, 1, 1, 2] => Some("forsaken pinky"),
            [1, 1, 2, 0, 0] => Some("right-hand rule"),
            [1, 0, 1, 2, 0] => Some("dino claws"),
            [1, 0, 0, 1, 2] => Some("unnamed"),
            _ => None,
        }
    }

    pub fn standard() -> Self {
        Self(vec![1, 1, 1, 2, 0])
    }
}

impl fmt::Display for GrippingStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for GrippingStyle {
    type Err = Error;

    /// Accepts `1,1,1,2,0`, `(1,1,1,2,0)` or `11120`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let digits: Vec<&str> = if t.contains(',') {
            t.split(',').map(str::trim).collect()
        } else {
            t.split("").filter(|p| !p.is_empty()).collect()
        };
        let c = digits
            .iter()
            .map(|d| match *d {
                "0" => Ok(0),
                "1" => Ok(1),
                "2" => Ok(2),
                other => Err(Error::Invalid(format!("bad style entry '{other}' in '{s}'"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if c.is_empty() {
            return Err(Error::Invalid("empty style".into()));
        }
        Ok(Self(c))
    }
}

/// Every tuple over {0,1,2} of length `n`, lexicographic.
pub fn all_styles(n: usize) -> Vec<GrippingStyle> {
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut c = vec![0u8; n];
            for slot in c.iter_mut().rev() {
                *slot = (k % 3) as u8;
                k /= 3;
            }
            GrippingStyle(c)
        })
        .collect()
}

/// Styles passing all pruning rules, in lexicographic order.
pub fn enumerate_valid_styles(n: usize) -> Result<Vec<GrippingStyle>> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 fingers, got {n}")));
    }
    // Build directly: thumb on 1, then fingers 2..n choose 0/1/2 with no 2 before 1.
    let mut out = Vec::new();
    let mut cur = vec![1u8];
    extend(&mut cur, n, false, &mut out);
    Ok(out)
}

fn extend(cur: &mut Vec<u8>, n: usize, seen_two: bool, out: &mut Vec<GrippingStyle>) {
    if cur.len() == n {
        let s = GrippingStyle(cur.clone());
        if s.is_valid() {
            out.push(s);
        }
        return;
    }
    for v in 0..=2u8 {
        if v == 1 && seen_two {
            continue;
        }
        cur.push(v);
        extend(cur, n, seen_two || v == 2, out);
        cur.pop();
    }
}
