//! SDPA sparse format (`.dat-s`).
//!
//! The problem is written in SDPA's dual form `max Tr(F₀Y)` s.t.
//! `Tr(FᵢY) = cᵢ`, `Y ⪰ 0`, with `Y = diag(G, s)` where `s` collects the
//! slacks of the inequality rows.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::problem::{Constraint, ConstraintTag, SdpProblem, Sense, SymSparse};

pub fn to_sdpa(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let n_ineq = problem.constraints.iter().filter(|c| c.sense == Sense::Le).count();
    let _ = writeln!(out, "\"maximize Tr(F0 Y); block 1 is the Gram matrix, block 2 the inequality slacks");
    let _ = writeln!(out, "{}", problem.constraints.len());
    let _ = writeln!(out, "{}", if n_ineq > 0 { 2 } else { 1 });
    if n_ineq > 0 {
        let _ = writeln!(out, "{} -{}", problem.gram_dim, n_ineq);
    } else {
        let _ = writeln!(out, "{}", problem.gram_dim);
    }
    let rhs: Vec<String> = problem.constraints.iter().map(|c| format!("{:.17e}", c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for &(i, j, v) in &problem.objective.entries {
        let _ = writeln!(out, "0 1 {} {} {:.17e}", i + 1, j + 1, v);
    }
    let mut slack = 0;
    for (k, c) in problem.constraints.iter().enumerate() {
        for &(i, j, v) in &c.matrix.entries {
            let _ = writeln!(out, "{} 1 {} {} {:.17e}", k + 1, i + 1, j + 1, v);
        }
        if c.sense == Sense::Le {
            slack += 1;
            let _ = writeln!(out, "{} 2 {} {} 1", k + 1, slack, slack);
        }
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Sdpa { line, msg: msg.into() }
}

/// Reads a problem written by [`to_sdpa`] (or any file of the same shape:
/// one dense-symmetric block plus an optional diagonal slack block carrying
/// unit entries). Tags are lost; every row becomes `Generic`.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let mut header = |what: &str| lines.next().ok_or_else(|| err(0, format!("missing {what}")));
    let clean = |s: &str| s.replace([',', '{', '}', '(', ')'], " ");

    let (ln, l) = header("mDIM")?;
    let n_con: usize = clean(l).split_whitespace().next().and_then(|t| t.parse().ok()).ok_or_else(|| err(ln, "bad mDIM"))?;
    let (ln, l) = header("nBLOCK")?;
    let n_block: usize = clean(l).split_whitespace().next().and_then(|t| t.parse().ok()).ok_or_else(|| err(ln, "bad nBLOCK"))?;
    if !(1..=2).contains(&n_block) {
        return Err(err(ln, "expected one or two blocks"));
    }
    let (ln, l) = header("block structure")?;
    let sizes: Vec<i64> = clean(l)
        .split_whitespace()
        .take(n_block)
        .map(|t| t.parse::<i64>().map_err(|_| err(ln, "bad block size")))
        .collect::<Result<_>>()?;
    if sizes.len() != n_block || sizes[0] <= 0 {
        return Err(err(ln, "first block must be a positive dense block"));
    }
    let m = sizes[0] as usize;
    let (ln, l) = header("right-hand side")?;
    let rhs: Vec<f64> = clean(l)
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| err(ln, format!("bad number {t}"))))
        .collect::<Result<_>>()?;
    if rhs.len() != n_con {
        return Err(err(ln, format!("expected {n_con} rhs entries, got {}", rhs.len())));
    }

    let mut triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_con + 1];
    let mut has_slack = vec![false; n_con];
    for (ln, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 5 {
            return Err(err(ln, "expected 5 fields"));
        }
        let ix = |s: &str| s.parse::<usize>().map_err(|_| err(ln, format!("bad index {s}")));
        let (k, blk, i, j) = (ix(t[0])?, ix(t[1])?, ix(t[2])?, ix(t[3])?);
        let v: f64 = t[4].parse().map_err(|_| err(ln, format!("bad value {}", t[4])))?;
        if k > n_con {
            return Err(err(ln, format!("matrix index {k} exceeds {n_con}")));
        }
        match blk {
            1 => {
                if i == 0 || j == 0 || i > m || j > m {
                    return Err(err(ln, "entry outside block 1"));
                }
                triplets[k].push((i - 1, j - 1, v));
            }
            2 if n_block == 2 => {
                if k == 0 || i != j || v != 1.0 {
                    return Err(err(ln, "slack block must hold unit diagonal entries"));
                }
                has_slack[k - 1] = true;
            }
            _ => return Err(err(ln, format!("unknown block {blk}"))),
        }
    }
    let objective = SymSparse::from_triplets(m, triplets[0].drain(..));
    let constraints = (0..n_con)
        .map(|k| Constraint {
            matrix: SymSparse::from_triplets(m, triplets[k + 1].drain(..)),
            sense: if has_slack[k] { Sense::Le } else { Sense::Eq },
            rhs: rhs[k],
            tag: ConstraintTag::Generic,
        })
        .collect();
    let p = SdpProblem::new(m, objective, constraints);
    p.validate()?;
    Ok(p)
}
