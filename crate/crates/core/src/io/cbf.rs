//! Reader for a subset of the Conic Benchmark Format.
//!
//! Supported records: `VER`, `OBJSENSE` (`MIN`), `VAR`, `CON`, `OBJACOORD`, `ACOORD`,
//! `BCOORD`. Cone codes: `F`, `L+`, `L-`, `L=`, `Q`, `QR`, `EXP`. Anything else is rejected.
//!
//! A file states `min cᵀx` subject to `Ax + b ∈ K_con` and `x ∈ K_var`. Variables in `F`/`L±`/`L=`
//! blocks become box variables (in file order) and the remaining blocks become cone variables.
//! Constraint rows map to `Gx − h ∈ C` with `G = A`, `h = −b`; `F` rows carry no constraint and
//! are dropped, `L-` rows are negated into nonnegative rows. The format orders an exponential
//! block as `(t, s, r)` with `t ≥ s·exp(r/s)`, so those blocks are reversed on the way in.

use crate::error::{PdcsError, Result};
use crate::linalg::SparseMatrix;
use crate::model::{Cone, ConeKind, ConicProgram};

fn err(line: usize, message: impl Into<String>) -> PdcsError {
    PdcsError::Parse { context: format!("line {line}"), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Code {
    Free,
    NonNeg,
    NonPos,
    Zero,
    Soc,
    Rsoc,
    Exp,
}

fn parse_code(s: &str, line: usize) -> Result<Code> {
    Ok(match s {
        "F" => Code::Free,
        "L+" => Code::NonNeg,
        "L-" => Code::NonPos,
        "L=" => Code::Zero,
        "Q" => Code::Soc,
        "QR" => Code::Rsoc,
        "EXP" => Code::Exp,
        other => {
            return Err(PdcsError::Unsupported(format!("cone `{other}` at line {line}")));
        }
    })
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable() }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .ok_or_else(|| PdcsError::Parse { context: "end of file".into(), message: format!("expected {what}") })
    }

    fn fields<const N: usize>(&mut self, what: &str) -> Result<(usize, [&'a str; N])> {
        let (ln, l) = self.next_line(what)?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let arr: [&str; N] =
            parts.try_into().map_err(|_| err(ln, format!("expected {N} fields for {what}")))?;
        Ok((ln, arr))
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| err(line, format!("cannot parse `{s}`")))
}

fn cone_list(lines: &mut Lines<'_>, what: &str) -> Result<(usize, Vec<(Code, usize)>)> {
    let (ln, [total, count]) = lines.fields::<2>(what)?;
    let total: usize = num(total, ln)?;
    let count: usize = num(count, ln)?;
    let mut cones = Vec::with_capacity(count);
    let mut sum = 0;
    for _ in 0..count {
        let (ln, [code, dim]) = lines.fields::<2>("cone")?;
        let dim: usize = num(dim, ln)?;
        let code = parse_code(code, ln)?;
        if code == Code::Exp && dim != 3 {
            return Err(err(ln, "exponential cones have dimension 3"));
        }
        sum += dim;
        cones.push((code, dim));
    }
    if sum != total {
        return Err(err(ln, format!("cone dimensions sum to {sum}, header says {total}")));
    }
    Ok((total, cones))
}

fn in_range(idx: usize, len: usize, ln: usize, what: &str) -> Result<usize> {
    if idx < len {
        Ok(idx)
    } else {
        Err(err(ln, format!("{what} index {idx} out of range")))
    }
}

/// Parses a CBF document into a validated program.
pub fn read_cbf_str(text: &str) -> Result<ConicProgram<f64>> {
    let mut lines = Lines::new(text);
    let mut vars: Option<(usize, Vec<(Code, usize)>)> = None;
    let mut cons: Option<(usize, Vec<(Code, usize)>)> = None;
    let mut obj: Vec<(usize, usize, f64)> = vec![];
    let mut acoord: Vec<(usize, usize, usize, f64)> = vec![];
    let mut bcoord: Vec<(usize, usize, f64)> = vec![];

    while let Some((ln, key)) = lines.inner.next() {
        match key {
            "VER" => {
                let (ln, [v]) = lines.fields::<1>("version")?;
                let v: u32 = num(v, ln)?;
                if v > 3 {
                    return Err(PdcsError::Unsupported(format!("format version {v}")));
                }
            }
            "OBJSENSE" => {
                let (ln, [s]) = lines.fields::<1>("objective sense")?;
                if s != "MIN" {
                    return Err(PdcsError::Unsupported(format!("objective sense `{s}` at line {ln}")));
                }
            }
            "VAR" => vars = Some(cone_list(&mut lines, "VAR header")?),
            "CON" => cons = Some(cone_list(&mut lines, "CON header")?),
            "OBJACOORD" => {
                let (ln, [k]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(k, ln)? {
                    let (ln, [j, v]) = lines.fields::<2>("objective entry")?;
                    obj.push((ln, num(j, ln)?, num(v, ln)?));
                }
            }
            "ACOORD" => {
                let (ln, [k]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(k, ln)? {
                    let (ln, [i, j, v]) = lines.fields::<3>("matrix entry")?;
                    acoord.push((ln, num(i, ln)?, num(j, ln)?, num(v, ln)?));
                }
            }
            "BCOORD" => {
                let (ln, [k]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(k, ln)? {
                    let (ln, [i, v]) = lines.fields::<2>("constant entry")?;
                    bcoord.push((ln, num(i, ln)?, num(v, ln)?));
                }
            }
            "INT" => {
                return Err(PdcsError::Unsupported(format!(
                    "integer variables (INT at line {ln}); relax them before solving"
                )));
            }
            other => {
                return Err(PdcsError::Unsupported(format!("record `{other}` at line {ln}")));
            }
        }
    }

    let (nvar, var_cones) = vars.ok_or_else(|| PdcsError::Parse {
        context: "file".into(),
        message: "no VAR section: empty program".into(),
    })?;
    if nvar == 0 {
        return Err(PdcsError::Parse { context: "file".into(), message: "empty program".into() });
    }
    let (ncon, con_cones) = cons.unwrap_or((0, vec![]));

    // columns: box variables first, then cone blocks
    let mut col = vec![0usize; nvar];
    let (mut l, mut u) = (vec![], vec![]);
    let mut primal_cones = vec![];
    let mut start = 0;
    let mut next = 0;
    for &(code, dim) in &var_cones {
        let (lo, hi) = match code {
            Code::Free => (f64::NEG_INFINITY, f64::INFINITY),
            Code::NonNeg => (0.0, f64::INFINITY),
            Code::NonPos => (f64::NEG_INFINITY, 0.0),
            Code::Zero => (0.0, 0.0),
            _ => {
                start += dim;
                continue;
            }
        };
        for k in start..start + dim {
            col[k] = next;
            next += 1;
            l.push(lo);
            u.push(hi);
        }
        start += dim;
    }
    start = 0;
    for &(code, dim) in &var_cones {
        let kind = match code {
            Code::Soc => ConeKind::SecondOrder,
            Code::Rsoc => ConeKind::RotatedSecondOrder,
            Code::Exp => ConeKind::Exponential,
            _ => {
                start += dim;
                continue;
            }
        };
        for k in 0..dim {
            let off = if code == Code::Exp { dim - 1 - k } else { k };
            col[start + k] = next + off;
        }
        next += dim;
        start += dim;
        primal_cones.push(Cone::new(kind, dim));
    }

    // rows: free rows dropped, nonpositive rows negated, exponential rows reversed
    let mut row: Vec<Option<(usize, f64)>> = vec![None; ncon];
    let mut dual_cones = vec![];
    let mut nrow = 0;
    start = 0;
    for &(code, dim) in &con_cones {
        let kind = match code {
            Code::Free => None,
            Code::NonNeg | Code::NonPos => Some(ConeKind::NonNeg),
            Code::Zero => Some(ConeKind::Zero),
            Code::Soc => Some(ConeKind::SecondOrder),
            Code::Rsoc => Some(ConeKind::RotatedSecondOrder),
            Code::Exp => Some(ConeKind::Exponential),
        };
        if let Some(kind) = kind {
            let sign = if code == Code::NonPos { -1.0 } else { 1.0 };
            for k in 0..dim {
                let off = if code == Code::Exp { dim - 1 - k } else { k };
                row[start + k] = Some((nrow + off, sign));
            }
            nrow += dim;
            dual_cones.push(Cone::new(kind, dim));
        }
        start += dim;
    }

    let mut c = vec![0.0; nvar];
    for (ln, j, v) in obj {
        c[col[in_range(j, nvar, ln, "variable")?]] += v;
    }
    let (mut gr, mut gc, mut gv) = (vec![], vec![], vec![]);
    for (ln, i, j, v) in acoord {
        let i = in_range(i, ncon, ln, "constraint")?;
        let j = in_range(j, nvar, ln, "variable")?;
        if let Some((r, s)) = row[i] {
            gr.push(r);
            gc.push(col[j]);
            gv.push(s * v);
        }
    }
    let mut h = vec![0.0; nrow];
    for (ln, i, v) in bcoord {
        if let Some((r, s)) = row[in_range(i, ncon, ln, "constraint")?] {
            h[r] -= s * v;
        }
    }

    let program = ConicProgram {
        c,
        g: SparseMatrix::from_triplets(nrow, nvar, &gr, &gc, &gv)?,
        h,
        l,
        u,
        primal_cones,
        dual_cones,
    };
    let issues = program.validate();
    if !issues.is_empty() {
        return Err(PdcsError::InvalidProgram(issues));
    }
    Ok(program)
}

pub fn read_cbf_subset(path: &std::path::Path) -> Result<ConicProgram<f64>> {
    read_cbf_str(&std::fs::read_to_string(path)?)
}
