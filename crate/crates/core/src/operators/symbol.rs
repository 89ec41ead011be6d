use std::fmt;
use std::str::FromStr;

use crate::geometry::DomainSpec;
use crate::operators::classical::green;
use crate::scalar::{format_complex, parse_complex};
use crate::{BlabError, Complex64, Result};

/// A symbol from the registry, evaluable at any point of a domain.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    /// `c`
    Const(Complex64),
    /// `log|z|`
    LogAbs,
    /// `G_a(z) = log|(a - z)/(1 - ā z)|`
    Green(Complex64),
    /// `|z|^α`
    AbsPower(f64),
    /// Real and imaginary parts of `inner` clamped to `[-k, k]`.
    Clamp(Box<SymbolExpr>, f64),
}

/// `f(ρ)` on a radial interval; the building block of radial symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    Const(Complex64),
    Log,
    Power(f64),
}

/// A radial symbol restricted to `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPiece {
    pub a: f64,
    pub b: f64,
    pub profile: RadialProfile,
}

impl RadialProfile {
    pub fn eval(&self, rho: f64) -> Complex64 {
        match *self {
            RadialProfile::Const(c) => c,
            RadialProfile::Log => Complex64::new(rho.ln(), 0.0),
            RadialProfile::Power(alpha) => Complex64::new(rho.powf(alpha), 0.0),
        }
    }

    /// Radii in `(a, b)` where the (real) profile crosses `level`.
    fn crossings(&self, level: f64, a: f64, b: f64) -> Vec<f64> {
        let x = match *self {
            RadialProfile::Const(_) => return Vec::new(),
            RadialProfile::Log => level.exp(),
            RadialProfile::Power(alpha) if alpha != 0.0 && level > 0.0 => level.powf(1.0 / alpha),
            RadialProfile::Power(_) => return Vec::new(),
        };
        if a < x && x < b {
            vec![x]
        } else {
            Vec::new()
        }
    }
}

impl SymbolExpr {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            SymbolExpr::Const(c) => *c,
            SymbolExpr::LogAbs => Complex64::new(z.norm().ln(), 0.0),
            SymbolExpr::Green(a) => Complex64::new(green(*a, z), 0.0),
            SymbolExpr::AbsPower(alpha) => Complex64::new(z.norm().powf(*alpha), 0.0),
            SymbolExpr::Clamp(inner, k) => {
                let v = inner.eval(z);
                Complex64::new(v.re.clamp(-k, *k), v.im.clamp(-k, *k))
            }
        }
    }

    /// Whether the symbol is essentially bounded on every bounded domain
    /// where it is defined.
    pub fn is_bounded(&self) -> bool {
        match self {
            SymbolExpr::Const(_) | SymbolExpr::Clamp(..) => true,
            SymbolExpr::AbsPower(alpha) => *alpha >= 0.0,
            SymbolExpr::LogAbs | SymbolExpr::Green(_) => false,
        }
    }

    /// `sup_d |φ|`, infinite when the symbol is unbounded on `d`.
    pub fn sup_norm(&self, d: &DomainSpec) -> f64 {
        let (lo, hi) = (d.r_inner(), d.r_outer());
        match self {
            SymbolExpr::Const(c) => c.norm(),
            SymbolExpr::LogAbs if lo > 0.0 => lo.ln().abs().max(hi.ln().abs()),
            SymbolExpr::LogAbs => f64::INFINITY,
            SymbolExpr::Green(_) => f64::INFINITY,
            SymbolExpr::AbsPower(alpha) if *alpha >= 0.0 => hi.powf(*alpha),
            SymbolExpr::AbsPower(alpha) if lo > 0.0 => lo.powf(*alpha),
            SymbolExpr::AbsPower(_) => f64::INFINITY,
            SymbolExpr::Clamp(inner, k) => inner.sup_norm(d).min(k * std::f64::consts::SQRT_2),
        }
    }

    /// Depends on `|z|` only.
    pub fn is_radial(&self) -> bool {
        match self {
            SymbolExpr::Const(_) | SymbolExpr::LogAbs | SymbolExpr::AbsPower(_) => true,
            SymbolExpr::Green(a) => a.norm() == 0.0,
            SymbolExpr::Clamp(inner, _) => inner.is_radial(),
        }
    }

    /// Points where the symbol blows up or is not smooth: the pole of a
    /// logarithm, and the origin for `|z|^α` unless `α` is an even integer.
    /// Quadrature grids are refined around them.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let origin = Complex64::new(0.0, 0.0);
        match self {
            SymbolExpr::LogAbs => vec![origin],
            SymbolExpr::Green(a) => vec![*a],
            SymbolExpr::AbsPower(alpha) if !(alpha.rem_euclid(2.0) == 0.0 && *alpha >= 0.0) => vec![origin],
            SymbolExpr::Clamp(..) | SymbolExpr::Const(_) | SymbolExpr::AbsPower(_) => Vec::new(),
        }
    }

    /// Piecewise closed-form profile on `[a, b]` for radial symbols.
    pub fn radial_pieces(&self, a: f64, b: f64) -> Option<Vec<RadialPiece>> {
        let whole = |profile| Some(vec![RadialPiece { a, b, profile }]);
        match self {
            SymbolExpr::Const(c) => whole(RadialProfile::Const(*c)),
            SymbolExpr::LogAbs => whole(RadialProfile::Log),
            SymbolExpr::Green(p) if p.norm() == 0.0 => whole(RadialProfile::Log),
            SymbolExpr::Green(_) => None,
            SymbolExpr::AbsPower(alpha) => whole(RadialProfile::Power(*alpha)),
            SymbolExpr::Clamp(inner, k) => {
                let mut out = Vec::new();
                for piece in inner.radial_pieces(a, b)? {
                    if let RadialProfile::Const(c) = piece.profile {
                        let v = Complex64::new(c.re.clamp(-k, *k), c.im.clamp(-k, *k));
                        out.push(RadialPiece { profile: RadialProfile::Const(v), ..piece });
                        continue;
                    }
                    let mut cuts = vec![piece.a];
                    cuts.extend(piece.profile.crossings(-k, piece.a, piece.b));
                    cuts.extend(piece.profile.crossings(*k, piece.a, piece.b));
                    cuts.push(piece.b);
                    cuts.sort_by(f64::total_cmp);
                    for w in cuts.windows(2) {
                        let mid = if w[0] == 0.0 { w[1] / 2.0 } else { (w[0] * w[1]).sqrt() };
                        let v = piece.profile.eval(mid).re;
                        let profile = if v > *k {
                            RadialProfile::Const(Complex64::new(*k, 0.0))
                        } else if v < -k {
                            RadialProfile::Const(Complex64::new(-k, 0.0))
                        } else {
                            piece.profile
                        };
                        out.push(RadialPiece { a: w[0], b: w[1], profile });
                    }
                }
                Some(out)
            }
        }
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolExpr::Const(c) if c.im == 0.0 => write!(f, "const:{}", c.re),
            SymbolExpr::Const(c) => write!(f, "const:{}", format_complex(*c)),
            SymbolExpr::LogAbs => write!(f, "log_abs"),
            SymbolExpr::Green(a) => write!(f, "green:{}", format_complex(*a)),
            SymbolExpr::AbsPower(alpha) => write!(f, "abs_power:{alpha}"),
            SymbolExpr::Clamp(inner, k) => write!(f, "clamp:{inner}:{k}"),
        }
    }
}

impl FromStr for SymbolExpr {
    type Err = BlabError;

    /// `const:0.5`, `log_abs`, `green:0.3+0.0i`, `abs_power:2`, `clamp:log_abs:10`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| BlabError::Parse(format!("symbol `{s}`: {why}"));
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad("malformed number"));
        match (head, rest) {
            ("log_abs", None) => Ok(SymbolExpr::LogAbs),
            ("const", Some(r)) => Ok(SymbolExpr::Const(parse_complex(r)?)),
            ("green", Some(r)) => {
                let a = parse_complex(r)?;
                if !(a.norm() < 1.0) {
                    return Err(bad("pole must lie in the unit disc"));
                }
                Ok(SymbolExpr::Green(a))
            }
            ("abs_power", Some(r)) => Ok(SymbolExpr::AbsPower(num(r)?)),
            ("clamp", Some(r)) => {
                let (inner, k) = r.rsplit_once(':').ok_or_else(|| bad("expected clamp:<symbol>:<k>"))?;
                let k = num(k)?;
                if !(k > 0.0) {
                    return Err(bad("clamp level must be positive"));
                }
                Ok(SymbolExpr::Clamp(Box::new(inner.parse()?), k))
            }
            _ => Err(bad("unknown symbol (known: const, log_abs, green, abs_power, clamp)")),
        }
    }
}

/// `Σ_m T_{φ_{m,1}} ⋯ T_{φ_{m,k_m}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub terms: Vec<Vec<SymbolExpr>>,
}

impl OperatorWord {
    pub fn new(terms: Vec<Vec<SymbolExpr>>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|t| t.is_empty()) {
            return Err(BlabError::InvalidArgument("operator word needs nonempty products".into()));
        }
        Ok(OperatorWord { terms })
    }

    pub fn single(symbol: SymbolExpr) -> Self {
        OperatorWord { terms: vec![vec![symbol]] }
    }

    pub fn identity() -> Self {
        Self::single(SymbolExpr::Const(Complex64::new(1.0, 0.0)))
    }

    /// The lone symbol of a one-factor word.
    pub fn as_single(&self) -> Option<&SymbolExpr> {
        match self.terms.as_slice() {
            [t] if t.len() == 1 => Some(&t[0]),
            _ => None,
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolExpr> {
        self.terms.iter().flatten()
    }

    /// `Σ_m Π_i ‖φ_{m,i}‖_∞` on `d`.
    pub fn norm_bound(&self, d: &DomainSpec) -> f64 {
        self.terms.iter().map(|t| t.iter().map(|s| s.sup_norm(d)).product::<f64>()).sum()
    }

    /// The same operator written with an extra identity factor in front of
    /// every product.
    pub fn with_identity_factors(&self) -> Self {
        let one = SymbolExpr::Const(Complex64::new(1.0, 0.0));
        OperatorWord {
            terms: self.terms.iter().map(|t| std::iter::once(one.clone()).chain(t.iter().cloned()).collect()).collect(),
        }
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.terms.iter().map(|t| t.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")).collect();
        write!(f, "{}", terms.join(";"))
    }
}

impl FromStr for OperatorWord {
    type Err = BlabError;

    /// `;`-separated products of `,`-separated symbols.
    fn from_str(s: &str) -> Result<Self> {
        let terms = s
            .split(';')
            .map(|t| t.split(',').map(str::parse).collect::<Result<Vec<SymbolExpr>>>())
            .collect::<Result<Vec<_>>>()?;
        OperatorWord::new(terms)
    }
}
