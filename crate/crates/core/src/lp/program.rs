use crate::error::{Error, Result};
use crate::scalar::Real;

/// `max cᵀx` subject to `A x = b`, `G x ≥ h`, `x ≥ l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub eq_rows: Vec<Vec<T>>,
    pub eq_rhs: Vec<T>,
    pub ge_rows: Vec<Vec<T>>,
    pub ge_rhs: Vec<T>,
    pub lower: Vec<T>,
}

impl<T: Real> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self { objective, eq_rows: Vec::new(), eq_rhs: Vec::new(), ge_rows: Vec::new(), ge_rhs: Vec::new(), lower: vec![T::zero(); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rows.len() + self.ge_rows.len()
    }

    pub fn add_eq(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.ge_rows.push(row);
        self.ge_rhs.push(rhs);
        self
    }

    /// `row · x ≤ rhs`, stored as `-row · x ≥ -rhs`.
    pub fn add_le(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.add_ge(row.into_iter().map(|x| -x).collect(), -rhs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let rows_ok = self.eq_rows.iter().chain(&self.ge_rows).all(|r| r.len() == n);
        if !rows_ok || self.lower.len() != n || self.eq_rows.len() != self.eq_rhs.len() || self.ge_rows.len() != self.ge_rhs.len() {
            return Err(Error::Dimension("linear program rows disagree with the variable count".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.eq_rows.iter().flatten())
            .chain(&self.eq_rhs)
            .chain(self.ge_rows.iter().flatten())
            .chain(&self.ge_rhs)
            .chain(&self.lower)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidModel("linear program has non-finite data".into()));
        }
        Ok(())
    }

    /// Plain-text form: `obj`, `eq`, `ge` and `lb` lines of space-separated numbers,
    /// constraint lines ending with the right-hand side.
    pub fn dump(&self) -> String {
        let line = |tag: &str, xs: &[T], rhs: Option<T>| {
            let mut s = tag.to_string();
            for x in xs.iter().chain(rhs.iter()) {
                s.push(' ');
                s.push_str(&format!("{}", x.as_f64()));
            }
            s.push('\n');
            s
        };
        let mut out = line("obj", &self.objective, None);
        for (r, &b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            out += &line("eq", r, Some(b));
        }
        for (r, &b) in self.ge_rows.iter().zip(&self.ge_rhs) {
            out += &line("ge", r, Some(b));
        }
        if self.lower.iter().any(|&l| l != T::zero()) {
            out += &line("lb", &self.lower, None);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lp: Option<Self> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let mut words = raw.split_whitespace();
            let Some(tag) = words.next() else { continue };
            let nums = words
                .map(|w| w.parse::<f64>().map(T::lit).map_err(|e| Error::Parse { line, msg: format!("{w}: {e}") }))
                .collect::<Result<Vec<T>>>()?;
            match (tag, lp.as_mut()) {
                ("obj", None) => lp = Some(Self::new(nums)),
                ("obj", Some(_)) => return Err(Error::Parse { line, msg: "second objective".into() }),
                (_, None) => return Err(Error::Parse { line, msg: "objective must come first".into() }),
                (tag @ ("eq" | "ge"), Some(p)) => {
                    if nums.len() != p.num_vars() + 1 {
                        return Err(Error::Parse { line, msg: format!("expected {} numbers", p.num_vars() + 1) });
                    }
                    let (row, rhs) = nums.split_at(p.num_vars());
                    if tag == "eq" {
                        p.add_eq(row.to_vec(), rhs[0]);
                    } else {
                        p.add_ge(row.to_vec(), rhs[0]);
                    }
                }
                ("lb", Some(p)) => {
                    if nums.len() != p.num_vars() {
                        return Err(Error::Parse { line, msg: format!("expected {} bounds", p.num_vars()) });
                    }
                    p.lower = nums;
                }
                (other, _) => return Err(Error::Parse { line, msg: format!("unknown row kind {other}") }),
            }
        }
        let lp = lp.ok_or(Error::Parse { line: 0, msg: "empty program".into() })?;
        lp.validate()?;
        Ok(lp)
    }
}
