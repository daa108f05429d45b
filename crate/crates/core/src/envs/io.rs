//! Line-oriented text formats for ground models and abstractions.
//!
//! Ground model: header `mdp S A gamma`, then `t s a s' p`, `r s a v` and
//! `start s p` lines. Abstraction: header `abs Sb Ab gammabar`, then
//! `t sp s a s' p`, `r sp s a v`, `start sb p` and `map s sb` lines, where `sp`
//! may be `*` for the start slot. `#` starts a comment.

use crate::abstraction::Mapping;
use crate::error::{Error, Result};
use crate::mdp::{GroundMdp, SecondOrderMdp};
use crate::scalar::Real;

/// Row sums may deviate from one by at most this much.
pub const ROW_TOL: f64 = 1e-9;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate() }
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<&'a str>);

    fn next(&mut self) -> Option<Self::Item> {
        for (k, raw) in self.inner.by_ref() {
            let body = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = body.split_whitespace().collect();
            if !words.is_empty() {
                return Some((k + 1, words));
            }
        }
        None
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn index(line: usize, w: &str, bound: usize, what: &str) -> Result<usize> {
    let i: usize = w.parse().map_err(|_| err(line, format!("bad {what} `{w}`")))?;
    if i >= bound {
        return Err(err(line, format!("{what} {i} out of range (< {bound})")));
    }
    Ok(i)
}

fn number(line: usize, w: &str) -> Result<f64> {
    let x: f64 = w.parse().map_err(|_| err(line, format!("bad number `{w}`")))?;
    if !x.is_finite() {
        return Err(err(line, format!("non-finite number `{w}`")));
    }
    Ok(x)
}

fn arity(line: usize, words: &[&str], n: usize) -> Result<()> {
    if words.len() != n {
        return Err(err(line, format!("`{}` takes {} fields, got {}", words[0], n - 1, words.len() - 1)));
    }
    Ok(())
}

/// Checks row sums against [`ROW_TOL`] and rescales them to sum exactly.
fn normalize(rows: &mut [f64], width: usize, lines: &[usize], what: &str) -> Result<()> {
    for (k, row) in rows.chunks_mut(width).enumerate() {
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > ROW_TOL {
            return Err(err(lines[k], format!("{what} row {k} sums to {total}")));
        }
        if (total - 1.0).abs() > 1e-12 {
            row.iter_mut().for_each(|x| *x /= total);
        }
    }
    Ok(())
}

fn header(it: &mut Lines<'_>, tag: &str) -> Result<(usize, usize, f64)> {
    let (line, words) = it.next().ok_or_else(|| err(0, "empty file"))?;
    if words[0] != tag {
        return Err(err(line, format!("expected `{tag}` header")));
    }
    arity(line, &words, 4)?;
    let n = words[1].parse().map_err(|_| err(line, "bad state count"))?;
    let a = words[2].parse().map_err(|_| err(line, "bad action count"))?;
    Ok((n, a, number(line, words[3])?))
}

pub fn parse_env<T: Real>(text: &str) -> Result<GroundMdp<T>> {
    let mut it = Lines::new(text);
    let (n, na, gamma) = header(&mut it, "mdp")?;
    let mut t = vec![0.0; n * na * n];
    let mut r = vec![0.0; n * na];
    let mut start = vec![0.0; n];
    let mut last = vec![0; n * na];
    let mut start_line = 0;
    for (line, w) in it {
        match w[0] {
            "t" => {
                arity(line, &w, 5)?;
                let (s, a, s2) = (index(line, w[1], n, "state")?, index(line, w[2], na, "action")?, index(line, w[3], n, "state")?);
                t[(s * na + a) * n + s2] += number(line, w[4])?;
                last[s * na + a] = line;
            }
            "r" => {
                arity(line, &w, 4)?;
                let (s, a) = (index(line, w[1], n, "state")?, index(line, w[2], na, "action")?);
                r[s * na + a] = number(line, w[3])?;
            }
            "start" => {
                arity(line, &w, 3)?;
                start[index(line, w[1], n, "state")?] += number(line, w[2])?;
                start_line = line;
            }
            other => return Err(err(line, format!("unknown line kind `{other}`"))),
        }
    }
    normalize(&mut t, n, &last, "transition")?;
    normalize(&mut start, n, &[start_line], "start")?;
    GroundMdp::new(n, na, t.into_iter().map(T::lit).collect(), r.into_iter().map(T::lit).collect(), T::lit(gamma), start.into_iter().map(T::lit).collect())
}

pub fn write_env<T: Real>(mdp: &GroundMdp<T>) -> String {
    let (n, na) = (mdp.num_states(), mdp.num_actions());
    let mut out = format!("mdp {n} {na} {}\n", mdp.gamma().as_f64());
    for s in 0..n {
        for a in 0..na {
            for (s2, &p) in mdp.row(s, a).iter().enumerate() {
                if p != T::zero() {
                    out += &format!("t {s} {a} {s2} {}\n", p.as_f64());
                }
            }
        }
    }
    for s in 0..n {
        for a in 0..na {
            let v = mdp.reward(s, a);
            if v != T::zero() {
                out += &format!("r {s} {a} {}\n", v.as_f64());
            }
        }
    }
    for (s, &p) in mdp.start().iter().enumerate() {
        if p != T::zero() {
            out += &format!("start {s} {}\n", p.as_f64());
        }
    }
    out
}

/// Rows never listed for a `(pred, state, action)` are copied from another
/// predecessor of the same `(state, action)`, so first-order models can be
/// written with one predecessor. A missing start defaults to uniform.
pub fn parse_abstraction<T: Real>(text: &str) -> Result<(SecondOrderMdp<T>, Mapping)> {
    let mut it = Lines::new(text);
    let (n, na, gamma_bar) = header(&mut it, "abs")?;
    let pairs = (n + 1) * n;
    let mut t = vec![0.0; pairs * na * n];
    let mut seen = vec![0usize; pairs * na];
    let mut r: Vec<Option<f64>> = vec![None; pairs * na];
    let mut start = vec![0.0; n];
    let mut start_line = None;
    let mut map: Vec<Option<usize>> = Vec::new();
    let pred = |line: usize, w: &str| if w == "*" { Ok(n) } else { index(line, w, n + 1, "predecessor") };
    for (line, w) in it {
        match w[0] {
            "t" => {
                arity(line, &w, 6)?;
                let (p, s, a, s2) = (pred(line, w[1])?, index(line, w[2], n, "state")?, index(line, w[3], na, "action")?, index(line, w[4], n, "state")?);
                let row = (p * n + s) * na + a;
                t[row * n + s2] += number(line, w[5])?;
                seen[row] = line;
            }
            "r" => {
                arity(line, &w, 5)?;
                let (p, s, a) = (pred(line, w[1])?, index(line, w[2], n, "state")?, index(line, w[3], na, "action")?);
                r[(p * n + s) * na + a] = Some(number(line, w[4])?);
            }
            "start" => {
                arity(line, &w, 3)?;
                start[index(line, w[1], n, "state")?] += number(line, w[2])?;
                start_line = Some(line);
            }
            "map" => {
                arity(line, &w, 3)?;
                let s: usize = w[1].parse().map_err(|_| err(line, format!("bad state `{}`", w[1])))?;
                if map.len() <= s {
                    map.resize(s + 1, None);
                }
                map[s] = Some(index(line, w[2], n, "abstract state")?);
            }
            other => return Err(err(line, format!("unknown line kind `{other}`"))),
        }
    }
    for s in 0..n {
        for a in 0..na {
            let rows: Vec<usize> = (0..=n).map(|p| (p * n + s) * na + a).collect();
            let Some(&src) = rows.iter().find(|&&k| seen[k] != 0) else {
                return Err(err(0, format!("no transition row for state {s}, action {a}")));
            };
            let reward = rows.iter().find_map(|&k| r[k]).unwrap_or(0.0);
            for &k in &rows {
                if seen[k] == 0 {
                    let copy: Vec<f64> = t[src * n..(src + 1) * n].to_vec();
                    t[k * n..(k + 1) * n].copy_from_slice(&copy);
                    seen[k] = seen[src];
                }
                r[k].get_or_insert(reward);
            }
        }
    }
    normalize(&mut t, n, &seen, "abstract transition")?;
    match start_line {
        Some(line) => normalize(&mut start, n, &[line], "start")?,
        None => start = vec![1.0 / n as f64; n],
    }
    let map = map
        .into_iter()
        .enumerate()
        .map(|(s, b)| b.ok_or_else(|| err(0, format!("ground state {s} has no `map` line"))))
        .collect::<Result<Vec<_>>>()?;
    let mapping = Mapping::new(map, n)?;
    let abs = SecondOrderMdp::new(
        n,
        na,
        t.into_iter().map(T::lit).collect(),
        r.into_iter().map(|x| T::lit(x.unwrap_or(0.0))).collect(),
        T::lit(gamma_bar),
        start.into_iter().map(T::lit).collect(),
    )?;
    Ok((abs, mapping))
}

pub fn write_abstraction<T: Real>(abs: &SecondOrderMdp<T>, mapping: &Mapping) -> String {
    let (n, na) = (abs.num_states(), abs.num_actions());
    let slot = |p: usize| if p == n { "*".to_string() } else { p.to_string() };
    let mut out = format!("abs {n} {na} {}\n", abs.gamma_bar().as_f64());
    for p in 0..=n {
        for s in 0..n {
            for a in 0..na {
                for (s2, &q) in abs.row(p, s, a).iter().enumerate() {
                    if q != T::zero() {
                        out += &format!("t {} {s} {a} {s2} {}\n", slot(p), q.as_f64());
                    }
                }
                out += &format!("r {} {s} {a} {}\n", slot(p), abs.reward(p, s, a).as_f64());
            }
        }
    }
    for (s, &p) in abs.start().iter().enumerate() {
        if p != T::zero() {
            out += &format!("start {s} {}\n", p.as_f64());
        }
    }
    for s in 0..mapping.num_states() {
        out += &format!("map {s} {}\n", mapping.of(s));
    }
    out
}
