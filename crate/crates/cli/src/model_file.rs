//! TOML model files.
//!
//! A model file has up to five sections:
//!
//! ```toml
//! [system]        # A, B, C, D, w, v
//! [initial_set]   # Fx, Fd, f
//! [assumptions]   # A1, A0, a0
//! [guarantees]    # G1, G0, g0
//! [sim]           # dt, horizon_s, seed, h, leader profile parameters
//! ```
//!
//! Matrices are nested arrays of rows. Every number is read from its source
//! text and converted exactly, so `0.1` is one tenth and not the nearest
//! binary float. Quoted strings such as `"1/3"` are also accepted.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use lticontract::sim::{kmh, LeaderProfileParams, DEFAULT_SEED};
use lticontract::{Assumptions, Contract, Guarantees, InitialSet, Matrix, Rational, Scalar, System};
use num_traits::{ToPrimitive, Zero};
use toml_edit::{TableLike, Value};

use crate::number::{parse_exact, to_toml_literal};

pub type Rows = Vec<Vec<Rational>>;

/// `(V1, V0, rhs)` of a one-step constraint `V1 u(k+1) + V0 u(k) <= rhs`.
pub type Triple<T> = (Matrix<T>, Matrix<T>, Vec<T>);

/// A located problem in a model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

/// Scalars that can be built from exact file values.
pub trait FromExact: Scalar {
    fn from_exact(q: &Rational) -> Self;
}

impl FromExact for f64 {
    fn from_exact(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl FromExact for Rational {
    fn from_exact(q: &Rational) -> Self {
        q.clone()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SystemSection {
    pub a: Rows,
    pub b: Option<Rows>,
    pub c: Option<Rows>,
    pub d: Option<Rows>,
    pub w: Option<Vec<Rational>>,
    pub v: Option<Vec<Rational>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialSetSection {
    pub fx: Option<Rows>,
    pub fd: Option<Rows>,
    pub f: Vec<Rational>,
}

/// `V1 u(k+1) + V0 u(k) <= rhs`; used for both assumptions and guarantees.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairSection {
    pub v1: Option<Rows>,
    pub v0: Option<Rows>,
    pub rhs: Vec<Rational>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimSection {
    pub dt: Option<Rational>,
    pub horizon_s: Option<Rational>,
    pub seed: Option<u64>,
    pub h: Option<Rational>,
    pub hold_s: Option<Rational>,
    pub sway_s: Option<Rational>,
    pub cruise_s: Option<Rational>,
    pub p_init: Option<Rational>,
    pub v_init_kmh: Option<Rational>,
    pub v_low_kmh: Option<Rational>,
    pub v_high_kmh: Option<Rational>,
    pub a_mag: Option<Rational>,
}

#[derive(Clone, Debug, Default)]
pub struct ModelFile {
    pub system: Option<SystemSection>,
    pub initial_set: Option<InitialSetSection>,
    pub assumptions: Option<PairSection>,
    pub guarantees: Option<PairSection>,
    pub sim: Option<SimSection>,
    /// Source line of every field read, keyed by `section.key`.
    lines: BTreeMap<String, usize>,
}

impl PartialEq for ModelFile {
    fn eq(&self, other: &Self) -> bool {
        self.system == other.system
            && self.initial_set == other.initial_set
            && self.assumptions == other.assumptions
            && self.guarantees == other.guarantees
            && self.sim == other.sim
    }
}

/// Resolved sizes `(n_x, n_d, n_y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n_x: usize,
    pub n_d: usize,
    pub n_y: usize,
}

/// Simulation settings with defaults applied, in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSettings {
    pub h: f64,
    pub horizon_s: f64,
    pub leader: LeaderProfileParams,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Reader<'a> {
    src: &'a str,
    lines: BTreeMap<String, usize>,
}

impl<'a> Reader<'a> {
    fn err(&self, span: Option<std::ops::Range<usize>>, field: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            line: span.map(|s| line_of(self.src, s.start)),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn number(&self, v: &Value, field: &str) -> Result<Rational, ParseError> {
        let text = match v {
            Value::Integer(_) | Value::Float(_) => match v.span() {
                Some(s) => self.src[s].to_string(),
                None => return Err(self.err(None, field, "number without source text")),
            },
            Value::String(s) => s.value().clone(),
            _ => return Err(self.err(v.span(), field, "expected a number")),
        };
        if text.starts_with("0x") || text.starts_with("0o") || text.starts_with("0b") {
            return Err(self.err(v.span(), field, format!("unsupported number literal {text:?}")));
        }
        parse_exact(&text).map_err(|m| self.err(v.span(), field, m))
    }

    fn vector(&self, v: &Value, field: &str) -> Result<Vec<Rational>, ParseError> {
        let arr = v
            .as_array()
            .ok_or_else(|| self.err(v.span(), field, "expected an array of numbers"))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{field}[{i}]")))
            .collect()
    }

    fn rows(&self, v: &Value, field: &str) -> Result<Rows, ParseError> {
        let arr = v
            .as_array()
            .ok_or_else(|| self.err(v.span(), field, "expected an array of rows"))?;
        let rows: Rows = arr
            .iter()
            .enumerate()
            .map(|(i, r)| self.vector(r, &format!("{field}[{i}]")))
            .collect::<Result<_, _>>()?;
        if let Some(first) = rows.first() {
            for (i, r) in rows.iter().enumerate() {
                if r.len() != first.len() {
                    let span = arr.get(i).and_then(|x| x.span());
                    return Err(self.err(
                        span,
                        &format!("{field}[{i}]"),
                        format!("row has {} entries, row 0 has {}", r.len(), first.len()),
                    ));
                }
            }
        }
        Ok(rows)
    }

    /// Iterates the keys of a section, rejecting unknown ones.
    fn fields<'t>(
        &mut self,
        table: &'t dyn TableLike,
        section: &str,
        known: &[&str],
    ) -> Result<BTreeMap<String, &'t Value>, ParseError> {
        let mut out = BTreeMap::new();
        for (key, item) in table.iter() {
            let field = format!("{section}.{key}");
            if !known.contains(&key) {
                return Err(self.err(
                    item.span(),
                    &field,
                    format!("unknown key; expected one of {}", known.join(", ")),
                ));
            }
            let value = item
                .as_value()
                .ok_or_else(|| self.err(item.span(), &field, "expected a value"))?;
            if let Some(s) = value.span() {
                self.lines.insert(field, line_of(self.src, s.start));
            }
            out.insert(key.to_string(), value);
        }
        Ok(out)
    }

    fn opt_rows(&self, f: &BTreeMap<String, &Value>, section: &str, key: &str) -> Result<Option<Rows>, ParseError> {
        f.get(key).map(|v| self.rows(v, &format!("{section}.{key}"))).transpose()
    }

    fn opt_vector(
        &self,
        f: &BTreeMap<String, &Value>,
        section: &str,
        key: &str,
    ) -> Result<Option<Vec<Rational>>, ParseError> {
        f.get(key).map(|v| self.vector(v, &format!("{section}.{key}"))).transpose()
    }

    fn opt_number(&self, f: &BTreeMap<String, &Value>, section: &str, key: &str) -> Result<Option<Rational>, ParseError> {
        f.get(key).map(|v| self.number(v, &format!("{section}.{key}"))).transpose()
    }

    fn required<T>(&self, v: Option<T>, field: &str) -> Result<T, ParseError> {
        v.ok_or_else(|| ParseError {
            line: None,
            field: field.to_string(),
            message: "missing required key".into(),
        })
    }
}

impl ModelFile {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let doc = toml_edit::Document::parse(src).map_err(|e| ParseError {
            line: e.span().map(|s| line_of(src, s.start)),
            field: String::new(),
            message: e.message().trim().to_string(),
        })?;
        let mut r = Reader {
            src,
            lines: BTreeMap::new(),
        };
        let mut m = ModelFile::default();
        for (name, item) in doc.as_table().iter() {
            let table = item.as_table_like().ok_or_else(|| r.err(item.span(), name, "expected a table"))?;
            match name {
                "system" => {
                    let f = r.fields(table, name, &["A", "B", "C", "D", "w", "v"])?;
                    let a = r.required(r.opt_rows(&f, name, "A")?, "system.A")?;
                    m.system = Some(SystemSection {
                        a,
                        b: r.opt_rows(&f, name, "B")?,
                        c: r.opt_rows(&f, name, "C")?,
                        d: r.opt_rows(&f, name, "D")?,
                        w: r.opt_vector(&f, name, "w")?,
                        v: r.opt_vector(&f, name, "v")?,
                    });
                }
                "initial_set" => {
                    let f = r.fields(table, name, &["Fx", "Fd", "f"])?;
                    let rhs = r.required(r.opt_vector(&f, name, "f")?, "initial_set.f")?;
                    m.initial_set = Some(InitialSetSection {
                        fx: r.opt_rows(&f, name, "Fx")?,
                        fd: r.opt_rows(&f, name, "Fd")?,
                        f: rhs,
                    });
                }
                "assumptions" | "guarantees" => {
                    let (k1, k0, kr) = if name == "assumptions" {
                        ("A1", "A0", "a0")
                    } else {
                        ("G1", "G0", "g0")
                    };
                    let f = r.fields(table, name, &[k1, k0, kr])?;
                    let rhs = r.required(r.opt_vector(&f, name, kr)?, &format!("{name}.{kr}"))?;
                    let sec = PairSection {
                        v1: r.opt_rows(&f, name, k1)?,
                        v0: r.opt_rows(&f, name, k0)?,
                        rhs,
                    };
                    if name == "assumptions" {
                        m.assumptions = Some(sec);
                    } else {
                        m.guarantees = Some(sec);
                    }
                }
                "sim" => {
                    let keys = [
                        "dt",
                        "horizon_s",
                        "seed",
                        "h",
                        "hold_s",
                        "sway_s",
                        "cruise_s",
                        "p_init",
                        "v_init_kmh",
                        "v_low_kmh",
                        "v_high_kmh",
                        "a_mag",
                    ];
                    let f = r.fields(table, name, &keys)?;
                    let seed = match f.get("seed") {
                        Some(v) => Some(
                            v.as_integer()
                                .and_then(|x| u64::try_from(x).ok())
                                .ok_or_else(|| r.err(v.span(), "sim.seed", "expected a non-negative integer"))?,
                        ),
                        None => None,
                    };
                    let n = |k: &str| r.opt_number(&f, name, k);
                    m.sim = Some(SimSection {
                        dt: n("dt")?,
                        horizon_s: n("horizon_s")?,
                        seed,
                        h: n("h")?,
                        hold_s: n("hold_s")?,
                        sway_s: n("sway_s")?,
                        cruise_s: n("cruise_s")?,
                        p_init: n("p_init")?,
                        v_init_kmh: n("v_init_kmh")?,
                        v_low_kmh: n("v_low_kmh")?,
                        v_high_kmh: n("v_high_kmh")?,
                        a_mag: n("a_mag")?,
                    });
                }
                other => {
                    return Err(r.err(
                        item.span(),
                        other,
                        "unknown section; expected system, initial_set, assumptions, guarantees or sim",
                    ))
                }
            }
        }
        m.lines = r.lines;
        Ok(m)
    }

    fn located(&self, field: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.lines.get(field).copied(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn missing(&self, section: &str) -> ParseError {
        ParseError {
            line: None,
            field: section.to_string(),
            message: "missing section".into(),
        }
    }

    /// Checks `rows` against an expected shape and converts it.
    fn matrix<T: FromExact>(
        &self,
        rows: Option<&Rows>,
        n_rows: usize,
        n_cols: usize,
        field: &str,
    ) -> Result<Matrix<T>, ParseError> {
        let Some(rows) = rows else {
            return Ok(Matrix::zeros(n_rows, n_cols));
        };
        if rows.len() != n_rows {
            return Err(self.located(field, format!("expected {n_rows} rows, found {}", rows.len())));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(self.located(field, format!("expected {n_cols} columns, found {}", r.len())));
        }
        let data = rows.iter().flatten().map(T::from_exact).collect();
        Matrix::new(n_rows, n_cols, data).map_err(|e| self.located(field, e.to_string()))
    }

    fn vector<T: FromExact>(&self, v: Option<&Vec<Rational>>, len: usize, field: &str) -> Result<Vec<T>, ParseError> {
        match v {
            None => Ok(vec![T::zero(); len]),
            Some(v) if v.len() == len => Ok(v.iter().map(T::from_exact).collect()),
            Some(v) => Err(self.located(field, format!("expected {len} entries, found {}", v.len()))),
        }
    }

    /// System sizes. Without a `[system]` section the input size comes from
    /// the assumption rows and the output size from the guarantee width.
    pub fn dims(&self) -> Result<Dims, ParseError> {
        let cols = |r: &Option<Rows>| r.as_ref().and_then(|r| r.first()).map(|r| r.len());
        if let Some(s) = &self.system {
            let n_x = s.a.len();
            if let Some(r) = s.a.iter().find(|r| r.len() != n_x) {
                return Err(self.located("system.A", format!("A must be square; row has {} entries for {n_x} rows", r.len())));
            }
            let (n_d, n_y) = if n_x > 0 {
                let b = s.b.as_ref().ok_or_else(|| self.located("system.B", "missing required key"))?;
                let c = s.c.as_ref().ok_or_else(|| self.located("system.C", "missing required key"))?;
                (b.first().map_or(0, |r| r.len()), c.len())
            } else {
                let d = s
                    .d
                    .as_ref()
                    .ok_or_else(|| self.located("system.D", "a system without states needs D"))?;
                (d.first().map_or(0, |r| r.len()), d.len())
            };
            return Ok(Dims { n_x, n_d, n_y });
        }
        let a = self.assumptions.as_ref();
        let n_d = a
            .and_then(|a| cols(&a.v1).or(cols(&a.v0)))
            .ok_or_else(|| self.missing("system (needed to size the contract)"))?;
        let width = self
            .guarantees
            .as_ref()
            .and_then(|g| cols(&g.v1).or(cols(&g.v0)))
            .unwrap_or(n_d);
        if width < n_d {
            return Err(self.located("guarantees.G1", format!("guarantee width {width} is below input size {n_d}")));
        }
        Ok(Dims {
            n_x: 0,
            n_d,
            n_y: width - n_d,
        })
    }

    pub fn system<T: FromExact>(&self) -> Result<System<T>, ParseError> {
        let s = self.system.as_ref().ok_or_else(|| self.missing("system"))?;
        let Dims { n_x, n_d, n_y } = self.dims()?;
        let a = self.matrix(Some(&s.a), n_x, n_x, "system.A")?;
        let b = self.matrix(s.b.as_ref(), n_x, n_d, "system.B")?;
        let c = self.matrix(s.c.as_ref(), n_y, n_x, "system.C")?;
        let d = self.matrix(s.d.as_ref(), n_y, n_d, "system.D")?;
        let w = self.vector(s.w.as_ref(), n_x, "system.w")?;
        let v = self.vector(s.v.as_ref(), n_y, "system.v")?;
        let init = match &self.initial_set {
            None => InitialSet::unconstrained(n_x, n_d),
            Some(i) => {
                let m = i.f.len();
                InitialSet::new(
                    self.matrix(i.fx.as_ref(), m, n_x, "initial_set.Fx")?,
                    self.matrix(i.fd.as_ref(), m, n_d, "initial_set.Fd")?,
                    self.vector(Some(&i.f), m, "initial_set.f")?,
                )
                .map_err(|e| self.located("initial_set", e.to_string()))?
            }
        };
        System::new(a, b, c, d, Some(w), Some(v), init).map_err(|e| self.located("system", e.to_string()))
    }

    pub fn assumptions<T: FromExact>(&self) -> Result<Assumptions<T>, ParseError> {
        let s = self.assumptions.as_ref().ok_or_else(|| self.missing("assumptions"))?;
        let n_d = self.dims()?.n_d;
        let m = s.rhs.len();
        Assumptions::new(
            self.matrix(s.v1.as_ref(), m, n_d, "assumptions.A1")?,
            self.matrix(s.v0.as_ref(), m, n_d, "assumptions.A0")?,
            self.vector(Some(&s.rhs), m, "assumptions.a0")?,
        )
        .map_err(|e| self.located("assumptions", e.to_string()))
    }

    pub fn guarantees<T: FromExact>(&self) -> Result<Guarantees<T>, ParseError> {
        let s = self.guarantees.as_ref().ok_or_else(|| self.missing("guarantees"))?;
        let Dims { n_d, n_y, .. } = self.dims()?;
        let m = s.rhs.len();
        Guarantees::new(
            self.matrix(s.v1.as_ref(), m, n_d + n_y, "guarantees.G1")?,
            self.matrix(s.v0.as_ref(), m, n_d + n_y, "guarantees.G0")?,
            self.vector(Some(&s.rhs), m, "guarantees.g0")?,
        )
        .map_err(|e| self.located("guarantees", e.to_string()))
    }

    pub fn contract<T: FromExact>(&self) -> Result<Contract<T>, ParseError> {
        Contract::new(self.assumptions()?, self.guarantees()?).map_err(|e| self.located("guarantees", e.to_string()))
    }

    /// The `(V1, V0, rhs)` triple of the assumptions or the guarantees, sized
    /// from the rows themselves.
    pub fn triple<T: FromExact>(&self, guarantees: bool) -> Result<Triple<T>, ParseError> {
        let (name, k1, k0, kr, sec) = if guarantees {
            ("guarantees", "G1", "G0", "g0", self.guarantees.as_ref())
        } else {
            ("assumptions", "A1", "A0", "a0", self.assumptions.as_ref())
        };
        let s = sec.ok_or_else(|| self.missing(name))?;
        let m = s.rhs.len();
        let width = [&s.v1, &s.v0]
            .iter()
            .find_map(|r| r.as_ref().and_then(|r| r.first()).map(|r| r.len()))
            .map_or_else(|| self.dims().map(|d| if guarantees { d.n_d + d.n_y } else { d.n_d }), Ok)?;
        Ok((
            self.matrix(s.v1.as_ref(), m, width, &format!("{name}.{k1}"))?,
            self.matrix(s.v0.as_ref(), m, width, &format!("{name}.{k0}"))?,
            self.vector(Some(&s.rhs), m, &format!("{name}.{kr}"))?,
        ))
    }

    /// Simulation settings with defaults for every missing key.
    ///
    /// When only `horizon_s` is given it is split evenly over the hold,
    /// sway and cruise phases; explicit phase lengths must add up to it.
    pub fn sim_settings(&self) -> Result<SimSettings, ParseError> {
        let s = self.sim.as_ref().ok_or_else(|| self.missing("sim"))?;
        let f = |v: &Option<Rational>, default: f64| v.as_ref().map_or(default, f64::from_exact);
        let base = LeaderProfileParams::default();
        let phases = [&s.hold_s, &s.sway_s, &s.cruise_s];
        let horizon = s.horizon_s.as_ref().map(f64::from_exact);
        let (hold, sway, cruise) = match (horizon, phases.iter().any(|p| p.is_some())) {
            (Some(t), false) => (t / 3.0, t / 3.0, t / 3.0),
            (Some(t), true) => {
                let (a, b, c) = (f(&s.hold_s, 0.0), f(&s.sway_s, 0.0), f(&s.cruise_s, 0.0));
                if ((a + b + c) - t).abs() > 1e-9 * (1.0 + t.abs()) {
                    return Err(self.located(
                        "sim.horizon_s",
                        format!("phase lengths add up to {} s, not {t} s", a + b + c),
                    ));
                }
                (a, b, c)
            }
            (None, _) => (
                f(&s.hold_s, base.hold_s),
                f(&s.sway_s, base.sway_s),
                f(&s.cruise_s, base.cruise_s),
            ),
        };
        let leader = LeaderProfileParams {
            dt: f(&s.dt, base.dt),
            hold_s: hold,
            sway_s: sway,
            cruise_s: cruise,
            p_init: f(&s.p_init, base.p_init),
            v_init: s.v_init_kmh.as_ref().map_or(base.v_init, |v| kmh(f64::from_exact(v))),
            v_low: s.v_low_kmh.as_ref().map_or(base.v_low, |v| kmh(f64::from_exact(v))),
            v_high: s.v_high_kmh.as_ref().map_or(base.v_high, |v| kmh(f64::from_exact(v))),
            a_mag: f(&s.a_mag, base.a_mag),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        };
        leader.validate().map_err(|e| self.located("sim", e.to_string()))?;
        Ok(SimSettings {
            h: f(&s.h, 2.0),
            horizon_s: horizon.unwrap_or(hold + sway + cruise),
            leader,
        })
    }

    /// Model file holding just `sys`.
    pub fn from_system(sys: &System<Rational>) -> Self {
        let rows = Matrix::to_rows;
        let nonzero = |v: &[Rational]| v.iter().any(|x| !x.is_zero());
        let init = sys.initial_set();
        ModelFile {
            system: Some(SystemSection {
                a: rows(sys.a()),
                b: Some(rows(sys.b())),
                c: Some(rows(sys.c())),
                d: Some(rows(sys.d())),
                w: nonzero(sys.w()).then(|| sys.w().to_vec()),
                v: nonzero(sys.v()).then(|| sys.v().to_vec()),
            }),
            initial_set: (init.n_rows() > 0).then(|| InitialSetSection {
                fx: Some(rows(init.fx())),
                fd: Some(rows(init.fd())),
                f: init.f().to_vec(),
            }),
            ..Default::default()
        }
    }

    /// Renders the model as TOML. Values with a finite decimal expansion
    /// are written as bare numbers, others as `"p/q"` strings; either form
    /// parses back to the same exact value.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        fn vec(v: &[Rational]) -> String {
            let items: Vec<String> = v.iter().map(to_toml_literal).collect();
            format!("[{}]", items.join(", "))
        }
        fn mat(out: &mut String, key: &str, rows: &Rows) {
            if rows.is_empty() {
                let _ = writeln!(out, "{key} = []");
                return;
            }
            let _ = writeln!(out, "{key} = [");
            for r in rows {
                let _ = writeln!(out, "  {},", vec(r));
            }
            let _ = writeln!(out, "]");
        }
        fn section(out: &mut String, name: &str) {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
        }
        if let Some(s) = &self.system {
            section(&mut out, "system");
            mat(&mut out, "A", &s.a);
            for (k, r) in [("B", &s.b), ("C", &s.c), ("D", &s.d)] {
                if let Some(r) = r {
                    mat(&mut out, k, r);
                }
            }
            for (k, v) in [("w", &s.w), ("v", &s.v)] {
                if let Some(v) = v {
                    let _ = writeln!(out, "{k} = {}", vec(v));
                }
            }
        }
        if let Some(i) = &self.initial_set {
            section(&mut out, "initial_set");
            for (k, r) in [("Fx", &i.fx), ("Fd", &i.fd)] {
                if let Some(r) = r {
                    mat(&mut out, k, r);
                }
            }
            let _ = writeln!(out, "f = {}", vec(&i.f));
        }
        for (name, keys, sec) in [
            ("assumptions", ["A1", "A0", "a0"], &self.assumptions),
            ("guarantees", ["G1", "G0", "g0"], &self.guarantees),
        ] {
            if let Some(s) = sec {
                section(&mut out, name);
                for (k, r) in [(keys[0], &s.v1), (keys[1], &s.v0)] {
                    if let Some(r) = r {
                        mat(&mut out, k, r);
                    }
                }
                let _ = writeln!(out, "{} = {}", keys[2], vec(&s.rhs));
            }
        }
        if let Some(s) = &self.sim {
            section(&mut out, "sim");
            let fields = [
                ("dt", &s.dt),
                ("horizon_s", &s.horizon_s),
                ("h", &s.h),
                ("hold_s", &s.hold_s),
                ("sway_s", &s.sway_s),
                ("cruise_s", &s.cruise_s),
                ("p_init", &s.p_init),
                ("v_init_kmh", &s.v_init_kmh),
                ("v_low_kmh", &s.v_low_kmh),
                ("v_high_kmh", &s.v_high_kmh),
                ("a_mag", &s.a_mag),
            ];
            for (k, v) in fields {
                if let Some(v) = v {
                    let _ = writeln!(out, "{k} = {}", to_toml_literal(v));
                }
            }
            if let Some(seed) = s.seed {
                let _ = writeln!(out, "seed = {seed}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[system]
A = [[1, 0.1], [0, 1]]
B = [[0], [0.1]]
C = [[1, 0]]

[assumptions]
A1 = [[1], [-1]]
A0 = [[0], [0]]
a0 = [1, "1/3"]

[guarantees]
G1 = [[0, 1]]
G0 = [[0, 0]]
g0 = [10]
"#;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn reads_exact_values() {
        let m = ModelFile::parse(SMALL).unwrap();
        let s = m.system.as_ref().unwrap();
        assert_eq!(s.a[0][1], q(1, 10));
        assert_eq!(m.assumptions.as_ref().unwrap().rhs[1], q(1, 3));
        assert_eq!(m.dims().unwrap(), Dims { n_x: 2, n_d: 1, n_y: 1 });
        let sys: System<Rational> = m.system().unwrap();
        assert_eq!(sys.b().row(1)[0], q(1, 10));
        let c: Contract<f64> = m.contract().unwrap();
        assert_eq!(c.n_y(), 1);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = ModelFile::parse(SMALL).unwrap();
        let text = m.to_toml();
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.contains("\"1/3\""));
    }

    #[test]
    fn errors_carry_locations() {
        let bad = SMALL.replace("C = [[1, 0]]", "C = [[1, 0], [1]]");
        let e = ModelFile::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert_eq!(e.field, "system.C[1]");

        let bad = SMALL.replace("g0 = [10]", "g0 = [10, 11]");
        let e = ModelFile::parse(&bad).unwrap().guarantees::<f64>().unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(13), "guarantees.G1"));
        assert!(e.message.contains("expected 2 rows"), "{e}");

        let e = ModelFile::parse("[system]\nA = [[1]]\nQ = 3\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(3), "system.Q"));

        let e = ModelFile::parse("[system]\nA = [[1, ]]]\n").unwrap_err();
        assert_eq!(e.line, Some(2));

        let e = ModelFile::parse("[system]\nA = [[inf]]\n").unwrap_err();
        assert_eq!(e.field, "system.A[0][0]");
    }

    #[test]
    fn missing_pieces() {
        let m = ModelFile::parse("[system]\nA = [[1]]\nB = [[1]]\nC = [[1]]\n").unwrap();
        assert!(m.assumptions::<f64>().is_err());
        assert!(m.sim_settings().is_err());
        let sys: System<f64> = m.system().unwrap();
        assert_eq!(sys.initial_set().n_rows(), 0);
        let e = ModelFile::parse("[system]\nA = [[1]]\nC = [[1]]\n").unwrap().system::<f64>().unwrap_err();
        assert_eq!(e.field, "system.B");
    }

    #[test]
    fn static_gain_file() {
        let src = "[system]\nA = [[0]]\nB = [[0, 0]]\nC = [[0], [0]]\nD = [[1, 0], [0, 1]]\n";
        let m = ModelFile::parse(src).unwrap();
        let sys: System<f64> = m.system().unwrap();
        assert_eq!((sys.n_x(), sys.n_d(), sys.n_y()), (1, 2, 2));
        let back = ModelFile::parse(&ModelFile::from_system(&m.system().unwrap()).to_toml()).unwrap();
        assert_eq!(back.system::<f64>().unwrap(), sys);
    }

    #[test]
    fn sim_defaults_and_horizon_split() {
        let m = ModelFile::parse("[sim]\nhorizon_s = 30\nseed = 7\n").unwrap();
        let s = m.sim_settings().unwrap();
        assert_eq!(s.leader.hold_s, 10.0);
        assert_eq!(s.leader.seed, 7);
        assert_eq!(s.h, 2.0);
        assert!((s.leader.v_init - 110.0 / 3.6).abs() < 1e-12);
        let bad = ModelFile::parse("[sim]\nhorizon_s = 30\nhold_s = 5\n").unwrap();
        assert!(bad.sim_settings().is_err());
        assert!(ModelFile::parse("[sim]\nseed = -1\n").is_err());
    }
}
