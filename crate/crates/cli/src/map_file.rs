//! Map files for `duality`: two finite spaces and a total map.
//!
//! ```text
//! space X a b c
//! space Y p q
//! map a p
//! map b p
//! map c q
//! ```

use std::collections::BTreeMap;

use regulim_core::discrete_top::DiscreteSpace;
use regulim_core::{Point, TameMap};

use crate::{CliError, Result};

pub fn parse(text: &str) -> Result<TameMap> {
    let mut x: Option<(usize, Vec<String>)> = None;
    let mut y: Option<(usize, Vec<String>)> = None;
    let mut images: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fail = |msg: String| CliError::Parse { line, msg };
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match toks[0] {
            "space" => {
                let slot = match toks.get(1) {
                    Some(&"X") => &mut x,
                    Some(&"Y") => &mut y,
                    _ => return Err(fail("expected `space X ...` or `space Y ...`".into())),
                };
                if slot.is_some() {
                    return Err(fail(format!("space {} declared twice", toks[1])));
                }
                *slot = Some((line, toks[2..].iter().map(|s| s.to_string()).collect()));
            }
            "map" => {
                if toks.len() != 3 {
                    return Err(fail("`map` takes a source atom and its image".into()));
                }
                if images
                    .insert(toks[1].to_string(), (line, toks[2].to_string()))
                    .is_some()
                {
                    return Err(fail(format!("atom `{}` mapped twice", toks[1])));
                }
            }
            other => return Err(fail(format!("unknown keyword `{other}`"))),
        }
    }
    let (xl, xs) = x.ok_or_else(|| CliError::Parse {
        line: last_line,
        msg: "missing `space X`".into(),
    })?;
    let (yl, ys) = y.ok_or_else(|| CliError::Parse {
        line: last_line,
        msg: "missing `space Y`".into(),
    })?;
    let sx = DiscreteSpace::finite(xs.iter().cloned()).map_err(|e| CliError::Parse {
        line: xl,
        msg: e.to_string(),
    })?;
    let sy = DiscreteSpace::finite(ys.iter().cloned()).map_err(|e| CliError::Parse {
        line: yl,
        msg: e.to_string(),
    })?;
    let mut rule = BTreeMap::new();
    for (a, (line, p)) in &images {
        if !sx.atoms().contains(a) {
            return Err(CliError::Parse {
                line: *line,
                msg: format!("`{a}` is not a point of X"),
            });
        }
        if !sy.atoms().contains(p) {
            return Err(CliError::Parse {
                line: *line,
                msg: format!("`{p}` is not a point of Y"),
            });
        }
        rule.insert(a.clone(), Point::atom(p.clone()));
    }
    if let Some(a) = xs.iter().find(|a| !images.contains_key(*a)) {
        return Err(CliError::Parse {
            line: xl,
            msg: format!("atom `{a}` has no image"),
        });
    }
    TameMap::new(sx, sy, rule, BTreeMap::new()).map_err(CliError::input)
}

pub fn emit(f: &TameMap) -> String {
    let join = |s: &DiscreteSpace| s.atoms().iter().cloned().collect::<Vec<_>>().join(" ");
    let mut out = format!("space X {}\nspace Y {}\n", join(f.source()), join(f.target()));
    for a in f.source().atoms() {
        if let Some(Point::Atom(p)) = f.atom_image(a) {
            out.push_str(&format!("map {a} {p}\n"));
        }
    }
    out
}
