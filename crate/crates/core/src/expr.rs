//! Expression trees over a unit's trajectory `(u_t, g_t)`.
//!
//! Amendment functions, redundant constraints and the helper functions used
//! to build them are all stored as [`Expr`] values so they can be printed,
//! serialized, and evaluated on any point of the unit's feasible set.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{StatusVector, UnitSchedule};

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("failed to parse expression: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("operator `{op}` expects {expected} argument(s), got {got}")]
    Arity {
        op: &'static str,
        expected: &'static str,
        got: usize,
    },
    #[error("operator `{op}` requires field `{field}`")]
    MissingField {
        op: &'static str,
        field: &'static str,
    },
    #[error("operator `{op}` does not accept field `{field}`")]
    UnexpectedField {
        op: &'static str,
        field: &'static str,
    },
    #[error("constant {0} is not finite")]
    NonFinite(f64),
    #[error("delta reference has {u} statuses but {g} outputs")]
    RefShape { u: usize, g: usize },
}

/// Reference point of an indicator node. Without `g` only statuses are compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRef {
    pub u: StatusVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
}

impl DeltaRef {
    fn matches(&self, x: &UnitSchedule, tol: f64) -> bool {
        if self.u != x.u {
            return false;
        }
        match &self.g {
            None => true,
            Some(g) => {
                g.len() == x.g.len() && g.iter().zip(&x.g).all(|(a, b)| (a - b).abs() <= tol)
            }
        }
    }
}

/// Expression node. Periods are zero-based; reading a period the point does
/// not have yields 0.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    U(usize),
    G(usize),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    /// 1 when the point equals the reference (outputs within tolerance), else 0.
    Delta(DeltaRef),
    /// 1 if the argument is strictly positive, else 0.
    Theta(Box<Expr>),
    Abs(Box<Expr>),
}

pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}

pub fn u(t: usize) -> Expr {
    Expr::U(t)
}

pub fn g(t: usize) -> Expr {
    Expr::G(t)
}

pub fn theta(e: Expr) -> Expr {
    Expr::Theta(Box::new(e))
}

/// `δ_{x,x*}`: indicator of the full trajectory.
pub fn delta_x(x: &UnitSchedule) -> Expr {
    Expr::Delta(DeltaRef {
        u: x.u.clone(),
        g: Some(x.g.clone()),
    })
}

/// `δ_{u,u*}`: indicator of the status vector only.
pub fn delta_u(u: &[u8]) -> Expr {
    Expr::Delta(DeltaRef {
        u: u.to_vec(),
        g: None,
    })
}

impl Expr {
    pub fn eval(&self, x: &UnitSchedule, tol: f64) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::U(t) => x.u.get(*t).map_or(0.0, |&s| f64::from(s)),
            Expr::G(t) => x.g.get(*t).copied().unwrap_or(0.0),
            Expr::Add(args) => args.iter().map(|e| e.eval(x, tol)).sum(),
            Expr::Sub(a, b) => a.eval(x, tol) - b.eval(x, tol),
            Expr::Mul(args) => args.iter().map(|e| e.eval(x, tol)).product(),
            Expr::Min(args) => args
                .iter()
                .map(|e| e.eval(x, tol))
                .fold(f64::INFINITY, f64::min),
            Expr::Max(args) => args
                .iter()
                .map(|e| e.eval(x, tol))
                .fold(f64::NEG_INFINITY, f64::max),
            Expr::Delta(r) => {
                if r.matches(x, tol) {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Theta(e) => {
                if e.eval(x, tol) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Abs(e) => e.eval(x, tol).abs(),
        }
    }

    pub fn add(self, other: Expr) -> Expr {
        match self {
            Expr::Add(mut args) => {
                args.push(other);
                Expr::Add(args)
            }
            e => Expr::Add(vec![e, other]),
        }
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Mul(vec![self, other])
    }

    /// `k · self`.
    pub fn scale(self, k: f64) -> Expr {
        Expr::Mul(vec![Expr::Const(k), self])
    }

    pub fn neg(self) -> Expr {
        self.scale(-1.0)
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    pub fn min_of(args: Vec<Expr>) -> Expr {
        Expr::Min(args)
    }

    pub fn max_of(args: Vec<Expr>) -> Expr {
        Expr::Max(args)
    }

    pub fn sum(mut args: Vec<Expr>) -> Expr {
        match args.len() {
            0 => Expr::Const(0.0),
            1 => args.pop().unwrap(),
            _ => Expr::Add(args),
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    /// Largest period index referenced, if any.
    pub fn max_period(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::U(t) | Expr::G(t) => Some(*t),
            Expr::Add(a) | Expr::Mul(a) | Expr::Min(a) | Expr::Max(a) => {
                a.iter().filter_map(Expr::max_period).max()
            }
            Expr::Sub(a, b) => a.max_period().max(b.max_period()),
            Expr::Delta(r) => r.u.len().checked_sub(1),
            Expr::Theta(e) | Expr::Abs(e) => e.max_period(),
        }
    }

    pub fn from_json(text: &str) -> Result<Expr, ExprError> {
        let raw: RawNode = serde_json::from_str(text)?;
        Expr::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression serialization is infallible")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    op: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    args: Vec<RawNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, rename = "ref", skip_serializing_if = "Option::is_none")]
    reference: Option<DeltaRef>,
}

impl RawNode {
    fn leaf(op: &str) -> Self {
        Self {
            op: op.into(),
            args: Vec::new(),
            t: None,
            value: None,
            reference: None,
        }
    }

    fn with_args(op: &str, args: Vec<RawNode>) -> Self {
        Self {
            args,
            ..Self::leaf(op)
        }
    }
}

impl From<&Expr> for RawNode {
    fn from(e: &Expr) -> Self {
        let many = |op: &str, args: &[Expr]| {
            RawNode::with_args(op, args.iter().map(RawNode::from).collect())
        };
        match e {
            Expr::Const(v) => RawNode {
                value: Some(*v),
                ..RawNode::leaf("const")
            },
            Expr::U(t) => RawNode {
                t: Some(*t),
                ..RawNode::leaf("u")
            },
            Expr::G(t) => RawNode {
                t: Some(*t),
                ..RawNode::leaf("g")
            },
            Expr::Add(a) => many("add", a),
            Expr::Mul(a) => many("mul", a),
            Expr::Min(a) => many("min", a),
            Expr::Max(a) => many("max", a),
            Expr::Sub(a, b) => {
                RawNode::with_args("sub", vec![a.as_ref().into(), b.as_ref().into()])
            }
            Expr::Delta(r) => RawNode {
                reference: Some(r.clone()),
                ..RawNode::leaf("delta")
            },
            Expr::Theta(a) => RawNode::with_args("theta", vec![a.as_ref().into()]),
            Expr::Abs(a) => RawNode::with_args("abs", vec![a.as_ref().into()]),
        }
    }
}

impl TryFrom<RawNode> for Expr {
    type Error = ExprError;

    fn try_from(raw: RawNode) -> Result<Self, Self::Error> {
        let op: &'static str = match raw.op.as_str() {
            "const" => "const",
            "u" => "u",
            "g" => "g",
            "add" => "add",
            "sub" => "sub",
            "mul" => "mul",
            "min" => "min",
            "max" => "max",
            "delta" => "delta",
            "theta" => "theta",
            "abs" => "abs",
            other => return Err(ExprError::UnknownOp(other.to_string())),
        };
        let leaf = matches!(op, "const" | "u" | "g" | "delta");
        if leaf && !raw.args.is_empty() {
            return Err(ExprError::Arity {
                op,
                expected: "0",
                got: raw.args.len(),
            });
        }
        if op != "const" && raw.value.is_some() {
            return Err(ExprError::UnexpectedField { op, field: "value" });
        }
        if !matches!(op, "u" | "g") && raw.t.is_some() {
            return Err(ExprError::UnexpectedField { op, field: "t" });
        }
        if op != "delta" && raw.reference.is_some() {
            return Err(ExprError::UnexpectedField { op, field: "ref" });
        }
        let unary = |args: Vec<RawNode>| -> Result<Box<Expr>, ExprError> {
            let got = args.len();
            let mut it = args.into_iter();
            match (it.next(), it.next()) {
                (Some(a), None) => Ok(Box::new(Expr::try_from(a)?)),
                _ => Err(ExprError::Arity {
                    op,
                    expected: "1",
                    got,
                }),
            }
        };
        let nary = |args: Vec<RawNode>| -> Result<Vec<Expr>, ExprError> {
            if args.is_empty() {
                return Err(ExprError::Arity {
                    op,
                    expected: "at least 1",
                    got: 0,
                });
            }
            args.into_iter().map(Expr::try_from).collect()
        };
        Ok(match op {
            "const" => {
                let v = raw
                    .value
                    .ok_or(ExprError::MissingField { op, field: "value" })?;
                if !v.is_finite() {
                    return Err(ExprError::NonFinite(v));
                }
                Expr::Const(v)
            }
            "u" => Expr::U(raw.t.ok_or(ExprError::MissingField { op, field: "t" })?),
            "g" => Expr::G(raw.t.ok_or(ExprError::MissingField { op, field: "t" })?),
            "add" => Expr::Add(nary(raw.args)?),
            "mul" => Expr::Mul(nary(raw.args)?),
            "min" => Expr::Min(nary(raw.args)?),
            "max" => Expr::Max(nary(raw.args)?),
            "sub" => {
                if raw.args.len() != 2 {
                    return Err(ExprError::Arity {
                        op,
                        expected: "2",
                        got: raw.args.len(),
                    });
                }
                let mut it = raw.args.into_iter();
                let a = Expr::try_from(it.next().unwrap())?;
                let b = Expr::try_from(it.next().unwrap())?;
                Expr::Sub(Box::new(a), Box::new(b))
            }
            "delta" => {
                let r = raw
                    .reference
                    .ok_or(ExprError::MissingField { op, field: "ref" })?;
                if let Some(g) = &r.g {
                    if g.len() != r.u.len() {
                        return Err(ExprError::RefShape {
                            u: r.u.len(),
                            g: g.len(),
                        });
                    }
                }
                Expr::Delta(r)
            }
            "theta" => Expr::Theta(unary(raw.args)?),
            "abs" => Expr::Abs(unary(raw.args)?),
            _ => unreachable!(),
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawNode::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawNode::deserialize(d)?;
        Expr::try_from(raw).map_err(serde::de::Error::custom)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, args: &[Expr]) -> fmt::Result {
    write!(f, "{name}[")?;
    for (k, a) in args.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, "]")
}

fn write_vec<T: fmt::Display>(f: &mut fmt::Formatter<'_>, v: &[T]) -> fmt::Result {
    write!(f, "(")?;
    for (k, a) in v.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

/// Human-readable form: constants at four decimals, periods one-based
/// (`u1`, `g1`, ...).
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v:.4}"),
            Expr::U(t) => write!(f, "u{}", t + 1),
            Expr::G(t) => write!(f, "g{}", t + 1),
            Expr::Add(args) => {
                write!(f, "(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(args) => {
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
            Expr::Min(args) => write_list(f, "min", args),
            Expr::Max(args) => write_list(f, "max", args),
            Expr::Delta(r) => {
                write!(f, "delta[u=")?;
                write_vec(f, &r.u)?;
                if let Some(g) = &r.g {
                    write!(f, ", g=")?;
                    let g: Vec<String> = g.iter().map(|v| format!("{v:.4}")).collect();
                    write_vec(f, &g)?;
                }
                write!(f, "]")
            }
            Expr::Theta(e) => write!(f, "theta({e})"),
            Expr::Abs(e) => write!(f, "|{e}|"),
        }
    }
}
