//! Text format for finite configurations.
//!
//! ```text
//! # single minus spin at the root
//! radius 2
//! boundary plus
//! e -1
//! ```
//!
//! Vertices missing from the body take the boundary value. With
//! `boundary explicit` every vertex of `W_{n+1}` must be listed and missing
//! interior vertices default to `+1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Boundary, FiniteConfig, Spin, MINUS, PLUS};
use crate::tree::{self, VertexWord, Volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BoundaryKind {
    Plus,
    Minus,
    Explicit,
}

fn parse_spin(tok: &str) -> Option<Spin> {
    match tok {
        "+1" | "1" | "+" => Some(PLUS),
        "-1" | "-" => Some(MINUS),
        _ => None,
    }
}

pub fn parse_config(text: &str) -> Result<FiniteConfig> {
    let mut radius: Option<usize> = None;
    let mut kind: Option<BoundaryKind> = None;
    let mut body: BTreeMap<VertexWord, (Spin, usize)> = BTreeMap::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(err(format!("expected two fields, found {}", toks.len())));
        }
        match toks[0] {
            "radius" => {
                if radius.is_some() {
                    return Err(err("duplicate radius header".into()));
                }
                let n: usize = toks[1]
                    .parse()
                    .map_err(|_| err(format!("bad radius {:?}", toks[1])))?;
                if n > 20 {
                    return Err(err(format!("radius {n} is larger than 20")));
                }
                radius = Some(n);
            }
            "boundary" => {
                if kind.is_some() {
                    return Err(err("duplicate boundary header".into()));
                }
                kind = Some(match toks[1] {
                    "plus" => BoundaryKind::Plus,
                    "minus" => BoundaryKind::Minus,
                    "explicit" => BoundaryKind::Explicit,
                    other => return Err(err(format!("unknown boundary {other:?}"))),
                });
            }
            word => {
                let v: VertexWord = word.parse().map_err(|e: Error| err(e.to_string()))?;
                let s = parse_spin(toks[1]).ok_or_else(|| err(format!("bad spin {:?}", toks[1])))?;
                if body.insert(v.clone(), (s, line_no)).is_some() {
                    return Err(err(format!("vertex {v} listed twice")));
                }
            }
        }
    }

    let n = radius.ok_or(Error::Parse {
        line: 0,
        message: "missing `radius <n>` header".into(),
    })?;
    let kind = kind.ok_or(Error::Parse {
        line: 0,
        message: "missing `boundary plus|minus|explicit` header".into(),
    })?;

    let vol = Volume::new(n + 1);
    let inner = tree::ball_size(n);
    let default = if kind == BoundaryKind::Minus { MINUS } else { PLUS };
    let mut spins = vec![default; inner];
    let mut ring: Vec<Option<Spin>> = vec![None; tree::sphere_size(n + 1)];
    for (v, (s, line)) in &body {
        let i = vol.index_of(v).ok_or(Error::Parse {
            line: *line,
            message: format!("vertex {v} lies outside V_{}", n + 1),
        })?;
        if i < inner {
            spins[i] = *s;
        } else {
            match kind {
                BoundaryKind::Explicit => ring[i - inner] = Some(*s),
                _ if *s == default => {}
                _ => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("vertex {v} on W_{} conflicts with the constant boundary", n + 1),
                    })
                }
            }
        }
    }
    let boundary = match kind {
        BoundaryKind::Plus => Boundary::Plus,
        BoundaryKind::Minus => Boundary::Minus,
        BoundaryKind::Explicit => {
            let mut out = Vec::with_capacity(ring.len());
            for (k, s) in ring.iter().enumerate() {
                match s {
                    Some(s) => out.push(*s),
                    None => {
                        return Err(Error::Parse {
                            line: 0,
                            message: format!(
                                "explicit boundary is missing vertex {}",
                                vol.word(inner + k)
                            ),
                        })
                    }
                }
            }
            Boundary::Explicit(out)
        }
    };
    FiniteConfig::new(n, spins, boundary)
}

/// Writes a configuration in the format read by [`parse_config`]. Only
/// vertices that differ from the default are listed.
pub fn format_config(cfg: &FiniteConfig) -> String {
    let vol = Volume::new(cfg.radius + 1);
    let mut out = format!("radius {}\n", cfg.radius);
    let (name, default) = match cfg.boundary {
        Boundary::Plus => ("plus", PLUS),
        Boundary::Minus => ("minus", MINUS),
        Boundary::Explicit(_) => ("explicit", PLUS),
    };
    out.push_str(&format!("boundary {name}\n"));
    for (i, &s) in cfg.spins.iter().enumerate() {
        if s != default {
            out.push_str(&format!("{} {:+}\n", vol.word(i), s));
        }
    }
    if let Boundary::Explicit(ring) = &cfg.boundary {
        let inner = cfg.spins.len();
        for (k, &s) in ring.iter().enumerate() {
            out.push_str(&format!("{} {:+}\n", vol.word(inner + k), s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_minus() {
        let cfg = parse_config("# comment\nradius 2\nboundary plus\ne -1\n").unwrap();
        assert_eq!(cfg.radius, 2);
        assert_eq!(cfg.spins.len(), 10);
        assert_eq!(cfg.spins[0], MINUS);
        assert!(cfg.spins[1..].iter().all(|&s| s == PLUS));
        assert_eq!(cfg.boundary, Boundary::Plus);
    }

    #[test]
    fn accepts_all_spin_spellings() {
        let cfg = parse_config("radius 1\nboundary minus\n1 +1\n2 1\n3 +  # trailing\ne -\n").unwrap();
        assert_eq!(cfg.spins, vec![MINUS, PLUS, PLUS, PLUS]);
    }

    #[test]
    fn explicit_boundary_must_be_complete() {
        let mut text = String::from("radius 0\nboundary explicit\n1 -1\n2 +1\n");
        assert!(parse_config(&text).is_err());
        text.push_str("3 -1\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.boundary, Boundary::Explicit(vec![MINUS, PLUS, MINUS]));
        assert_eq!(cfg.spins, vec![PLUS]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("boundary plus\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("radius 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_config("radius 1\nboundary plus\n14 -1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_config("radius 1\nboundary plus\ne 0\n").is_err());
        assert!(parse_config("radius 1\nboundary plus\n121 -1\n").is_err());
        assert!(parse_config("radius 1\nboundary plus\n12 -1\n").is_err());
        assert!(parse_config("radius 1\nboundary plus\ne -1\ne -1\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = FiniteConfig::new(
            1,
            vec![MINUS, PLUS, MINUS, PLUS],
            Boundary::Explicit(vec![PLUS, MINUS, MINUS, PLUS, PLUS, MINUS]),
        )
        .unwrap();
        assert_eq!(parse_config(&format_config(&cfg)).unwrap(), cfg);
        let cfg = FiniteConfig::uniform(3, MINUS, Boundary::Minus);
        assert_eq!(parse_config(&format_config(&cfg)).unwrap(), cfg);
    }
}
