//! SCL formula AST, derived operators and structural metadata.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{BoundedKernel, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Ge,
    Le,
    Gt,
    Lt,
}

impl Comparison {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparison::Ge => ">=",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Lt => "<",
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Comparison::Gt | Comparison::Lt)
    }

    /// True for `>=` and `>`.
    pub fn is_lower_bound(&self) -> bool {
        matches!(self, Comparison::Ge | Comparison::Gt)
    }
}

/// Single-variable threshold predicate `variable cmp threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub variable: String,
    pub comparison: Comparison,
    pub threshold: f64,
}

impl Atom {
    pub fn new(variable: impl Into<String>, comparison: Comparison, threshold: f64) -> Self {
        Self {
            variable: variable.into(),
            comparison,
            threshold,
        }
    }

    /// Secondary signal `g(v)`: positive when the predicate holds with margin.
    pub fn signed_distance(&self, value: f64) -> f64 {
        if self.comparison.is_lower_bound() {
            value - self.threshold
        } else {
            self.threshold - value
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        match self.comparison {
            Comparison::Ge => value >= self.threshold,
            Comparison::Le => value <= self.threshold,
            Comparison::Gt => value > self.threshold,
            Comparison::Lt => value < self.threshold,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.variable, self.comparison.symbol(), self.threshold)
    }
}

/// Threshold `p` of a convolution operator, validated to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidThreshold(p))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn complement(&self) -> Self {
        Self(1.0 - self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Globally {
        window: Window,
        arg: Box<Formula>,
    },
    Eventually {
        window: Window,
        arg: Box<Formula>,
    },
    /// `<k, p> arg`: true when `k * chi(arg) >= p`.
    Conv {
        kernel: BoundedKernel,
        p: Probability,
        arg: Box<Formula>,
    },
    /// `<k, p>* arg`, i.e. `!<k, 1 - p> !arg`.
    ConvDual {
        kernel: BoundedKernel,
        p: Probability,
        arg: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(variable: impl Into<String>, comparison: Comparison, threshold: f64) -> Self {
        Formula::Atom(Atom::new(variable, comparison, threshold))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Formula) -> Self {
        Formula::Not(Box::new(arg))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn globally(t0: f64, t1: f64, arg: Formula) -> Result<Self> {
        Ok(Formula::Globally {
            window: Window::new(t0, t1)?,
            arg: Box::new(arg),
        })
    }

    pub fn eventually(t0: f64, t1: f64, arg: Formula) -> Result<Self> {
        Ok(Formula::Eventually {
            window: Window::new(t0, t1)?,
            arg: Box::new(arg),
        })
    }

    pub fn conv(kernel: BoundedKernel, p: f64, arg: Formula) -> Result<Self> {
        Ok(Formula::Conv {
            kernel,
            p: Probability::new(p)?,
            arg: Box::new(arg),
        })
    }

    pub fn conv_dual(kernel: BoundedKernel, p: f64, arg: Formula) -> Result<Self> {
        Ok(Formula::ConvDual {
            kernel,
            p: Probability::new(p)?,
            arg: Box::new(arg),
        })
    }

    /// Minimal trace duration needed to evaluate the formula at `t = 0`.
    pub fn horizon(&self) -> f64 {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0.0,
            Formula::Not(a) => a.horizon(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => a.horizon().max(b.horizon()),
            Formula::Globally { window, arg } | Formula::Eventually { window, arg } => window.t1() + arg.horizon(),
            Formula::Conv { kernel, arg, .. } | Formula::ConvDual { kernel, arg, .. } => kernel.t1() + arg.horizon(),
        }
    }

    /// Rewrites into the core grammar: true, false, atoms, `!`, `|`, `<k,p>` and `<k,p>*`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(a) => Formula::not(a.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::And(a, b) => Formula::not(Formula::or(
                Formula::not(a.desugar()),
                Formula::not(b.desugar()),
            )),
            Formula::Implies(a, b) => Formula::or(Formula::not(a.desugar()), b.desugar()),
            Formula::Globally { window, arg } => Formula::Conv {
                kernel: flat_on(window),
                p: Probability(1.0),
                arg: Box::new(arg.desugar()),
            },
            Formula::Eventually { window, arg } => Formula::ConvDual {
                kernel: flat_on(window),
                p: Probability(0.0),
                arg: Box::new(arg.desugar()),
            },
            Formula::Conv { kernel, p, arg } => Formula::Conv {
                kernel: *kernel,
                p: *p,
                arg: Box::new(arg.desugar()),
            },
            Formula::ConvDual { kernel, p, arg } => Formula::ConvDual {
                kernel: *kernel,
                p: *p,
                arg: Box::new(arg.desugar()),
            },
        }
    }

    /// Desugars and replaces every `<k,p>* phi` by `!<k,1-p> !phi`.
    pub fn expand_duals(&self) -> Formula {
        fn go(f: &Formula) -> Formula {
            match f {
                Formula::Not(a) => Formula::not(go(a)),
                Formula::Or(a, b) => Formula::or(go(a), go(b)),
                Formula::Conv { kernel, p, arg } => Formula::Conv {
                    kernel: *kernel,
                    p: *p,
                    arg: Box::new(go(arg)),
                },
                Formula::ConvDual { kernel, p, arg } => Formula::not(Formula::Conv {
                    kernel: *kernel,
                    p: p.complement(),
                    arg: Box::new(Formula::not(go(arg))),
                }),
                other => other.clone(),
            }
        }
        go(&self.desugar())
    }

    /// Number of operator nodes (`!`, `|`, `<k,p>`, `<k,p>*`) after desugaring.
    pub fn size(&self) -> usize {
        fn count(f: &Formula) -> usize {
            match f {
                Formula::True | Formula::False | Formula::Atom(_) => 0,
                Formula::Not(a) => 1 + count(a),
                Formula::Or(a, b) => 1 + count(a) + count(b),
                Formula::Conv { arg, .. } | Formula::ConvDual { arg, .. } => 1 + count(arg),
                _ => unreachable!("desugared formula has no derived operators"),
            }
        }
        count(&self.desugar())
    }

    /// Variable names in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    if !out.contains(&a.variable.as_str()) {
                        out.push(&a.variable);
                    }
                }
                Formula::Not(a) => walk(a, out),
                Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Globally { arg, .. }
                | Formula::Eventually { arg, .. }
                | Formula::Conv { arg, .. }
                | Formula::ConvDual { arg, .. } => walk(arg, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Whether any temporal operator occurs.
    pub fn is_temporal(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => false,
            Formula::Not(a) => a.is_temporal(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => a.is_temporal() || b.is_temporal(),
            _ => true,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

fn flat_on(window: &Window) -> BoundedKernel {
    BoundedKernel::new(crate::kernel::KernelShape::Flat, *window).expect("validated window")
}

fn write_operand(f: &mut fmt::Formatter<'_>, sub: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

fn write_prefixed(f: &mut fmt::Formatter<'_>, arg: &Formula) -> fmt::Result {
    let parens = matches!(arg, Formula::Atom(_)) || arg.precedence() < 4;
    if parens {
        write!(f, " ({arg})")
    } else {
        write!(f, " {arg}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                if matches!(**a, Formula::Atom(_)) || a.precedence() < 4 {
                    write!(f, "!({a})")
                } else {
                    write!(f, "!{a}")
                }
            }
            Formula::Implies(a, b) => {
                write_operand(f, a, a.precedence() <= 1)?;
                write!(f, " -> ")?;
                write_operand(f, b, false)
            }
            Formula::Or(a, b) => {
                write_operand(f, a, matches!(**a, Formula::Implies(..) | Formula::And(..)))?;
                write!(f, " | ")?;
                write_operand(f, b, b.precedence() < 4)
            }
            Formula::And(a, b) => {
                write_operand(f, a, a.precedence() < 3)?;
                write!(f, " & ")?;
                write_operand(f, b, b.precedence() < 4)
            }
            Formula::Globally { window, arg } => {
                write!(f, "G[{},{}]", window.t0(), window.t1())?;
                write_prefixed(f, arg)
            }
            Formula::Eventually { window, arg } => {
                write!(f, "F[{},{}]", window.t0(), window.t1())?;
                write_prefixed(f, arg)
            }
            Formula::Conv { kernel, p, arg } => {
                write!(f, "<{kernel}, {p}>")?;
                write_prefixed(f, arg)
            }
            Formula::ConvDual { kernel, p, arg } => {
                write!(f, "<{kernel}, {p}>*")?;
                write_prefixed(f, arg)
            }
        }
    }
}
