//! Operator composition strings such as `W(-1)*G(l,mu)*W(-1)`.
//!
//! Factors are applied right to left. Arguments are numbers or names bound in
//! the evaluation context (`l`, `mu`, `eps`, `m`, ...).

use std::collections::BTreeMap;
use std::fmt;

use super::{apply_h0, apply_multiplier, weight_any, ConjugateOperator, CutoffFunction, MultiplierSymbol};
use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::lap::{resolvent_g, ResolventQuery, Sign};

/// A numeric argument, resolved against the context at application time.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Value(f64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpFactor {
    /// `H0` or `H0(m)`.
    Dirac(Option<Arg>),
    /// `B`.
    Cutoff,
    /// `Rm(m)`.
    Regularizer(Arg),
    /// `K`.
    Commutator,
    /// `invLap`.
    InverseLaplacian,
    /// `W(s)`: multiplication by `⟨x⟩^s`.
    Weight(Arg),
    /// `G(λ, μ)` or `G(λ, μ, ε)`; `Gm(...)` selects the minus sign.
    Resolvent { args: Vec<Arg>, sign: Sign },
    /// `A`.
    Conjugate,
}

/// A parsed product of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct OpExpr {
    factors: Vec<OpFactor>,
}

/// Everything needed to evaluate an expression.
#[derive(Debug, Clone)]
pub struct OpContext {
    pub rep: CliffordRep,
    pub cutoff: CutoffFunction,
    pub vars: BTreeMap<String, f64>,
}

impl OpContext {
    pub fn new(rep: &CliffordRep) -> Self {
        Self {
            rep: rep.clone(),
            cutoff: CutoffFunction,
            vars: BTreeMap::new(),
        }
    }

    pub fn with_var(mut self, name: &str, value: f64) -> Self {
        self.vars.insert(name.to_string(), value);
        self
    }

    fn resolve(&self, a: &Arg) -> Result<f64> {
        match a {
            Arg::Value(v) => Ok(*v),
            Arg::Name(n) => self
                .vars
                .get(n)
                .copied()
                .ok_or_else(|| Error::Parse(format!("unbound name `{n}`"))),
        }
    }
}

fn parse_arg(s: &str) -> Result<Arg> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty argument".into()));
    }
    match s.parse::<f64>() {
        Ok(v) => Ok(Arg::Value(v)),
        Err(_) if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => Ok(Arg::Name(s.into())),
        Err(_) => Err(Error::Parse(format!("bad argument `{s}`"))),
    }
}

fn parse_factor(tok: &str) -> Result<OpFactor> {
    let tok = tok.trim();
    let (name, args) = match tok.find('(') {
        Some(i) => {
            let inner = tok[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{tok}`")))?;
            let args = inner.split(',').map(parse_arg).collect::<Result<Vec<_>>>()?;
            (&tok[..i], args)
        }
        None => (tok, Vec::new()),
    };
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if args.len() < lo || args.len() > hi {
            Err(Error::Parse(format!("`{name}` takes {lo}..={hi} arguments, got {}", args.len())))
        } else {
            Ok(())
        }
    };
    Ok(match name {
        "H0" => {
            arity(0, 1)?;
            OpFactor::Dirac(args.into_iter().next())
        }
        "B" => {
            arity(0, 0)?;
            OpFactor::Cutoff
        }
        "K" => {
            arity(0, 0)?;
            OpFactor::Commutator
        }
        "invLap" => {
            arity(0, 0)?;
            OpFactor::InverseLaplacian
        }
        "A" => {
            arity(0, 0)?;
            OpFactor::Conjugate
        }
        "Rm" => {
            arity(1, 1)?;
            OpFactor::Regularizer(args[0].clone())
        }
        "W" => {
            arity(1, 1)?;
            OpFactor::Weight(args[0].clone())
        }
        "G" | "Gp" | "Gm" => {
            arity(2, 3)?;
            let sign = if name == "Gm" { Sign::Minus } else { Sign::Plus };
            OpFactor::Resolvent { args, sign }
        }
        _ => return Err(Error::Parse(format!("unknown operator `{name}`"))),
    })
}

/// Parses `F1*F2*...`; whitespace is ignored.
pub fn parse_op(s: &str) -> Result<OpExpr> {
    let mut factors = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse("unbalanced `)`".into()))?
            }
            '*' if depth == 0 => {
                factors.push(parse_factor(&s[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced `(`".into()));
    }
    factors.push(parse_factor(&s[start..])?);
    Ok(OpExpr { factors })
}

impl OpFactor {
    fn adjoint(&self) -> OpFactor {
        match self {
            OpFactor::Resolvent { args, sign } => OpFactor::Resolvent {
                args: args.clone(),
                sign: sign.flip(),
            },
            other => other.clone(),
        }
    }

    fn apply(&self, ctx: &OpContext, f: &SpinorField) -> Result<SpinorField> {
        match self {
            OpFactor::Dirac(m) => {
                let mass = match m {
                    Some(a) => ctx.resolve(a)?,
                    None => 0.0,
                };
                apply_h0(&ctx.rep, f, mass)
            }
            OpFactor::Cutoff => apply_multiplier(&MultiplierSymbol::cutoff(ctx.cutoff), f),
            OpFactor::Commutator => apply_multiplier(&MultiplierSymbol::commutator_k(&ctx.rep, ctx.cutoff), f),
            OpFactor::InverseLaplacian => apply_multiplier(&MultiplierSymbol::inverse_laplacian(), f),
            OpFactor::Regularizer(a) => {
                let m = ctx.resolve(a)?;
                if m <= 0.0 {
                    return Err(Error::InvalidArgument("Rm needs m > 0".into()));
                }
                apply_multiplier(&MultiplierSymbol::regularizer(m), f)
            }
            OpFactor::Weight(a) => Ok(weight_any(f, ctx.resolve(a)?)),
            OpFactor::Resolvent { args, sign } => {
                let eps = match args.get(2) {
                    Some(a) => ctx.resolve(a)?,
                    None => 0.0,
                };
                let q = ResolventQuery::new(ctx.resolve(&args[0])?, ctx.resolve(&args[1])?, eps, *sign)?;
                resolvent_g(&ctx.rep, &ctx.cutoff, &q, f)
            }
            OpFactor::Conjugate => ConjugateOperator::new(&ctx.rep, ctx.cutoff).apply(f),
        }
    }
}

impl OpExpr {
    pub fn factors(&self) -> &[OpFactor] {
        &self.factors
    }

    /// Applies the product to `f`, rightmost factor first.
    pub fn apply(&self, ctx: &OpContext, f: &SpinorField) -> Result<SpinorField> {
        let mut cur = f.clone();
        for fac in self.factors.iter().rev() {
            cur = fac.apply(ctx, &cur)?;
        }
        Ok(cur)
    }

    /// The formal adjoint: factors reversed, resolvent signs flipped. Every
    /// other factor is symmetric on the grid.
    pub fn adjoint(&self) -> OpExpr {
        OpExpr {
            factors: self.factors.iter().rev().map(OpFactor::adjoint).collect(),
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Value(v) => write!(f, "{v}"),
            Arg::Name(n) => f.write_str(n),
        }
    }
}

fn join(args: &[Arg]) -> String {
    args.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for OpFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpFactor::Dirac(None) => f.write_str("H0"),
            OpFactor::Dirac(Some(a)) => write!(f, "H0({a})"),
            OpFactor::Cutoff => f.write_str("B"),
            OpFactor::Commutator => f.write_str("K"),
            OpFactor::InverseLaplacian => f.write_str("invLap"),
            OpFactor::Conjugate => f.write_str("A"),
            OpFactor::Regularizer(a) => write!(f, "Rm({a})"),
            OpFactor::Weight(a) => write!(f, "W({a})"),
            OpFactor::Resolvent { args, sign } => match sign {
                Sign::Plus => write!(f, "G({})", join(args)),
                Sign::Minus => write!(f, "Gm({})", join(args)),
            },
        }
    }
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::{random_field, Grid, GridSpec};

    #[test]
    fn parses_sandwich() {
        let e = parse_op("W(-1) * G(l,mu) * W(-1)").unwrap();
        assert_eq!(e.factors().len(), 3);
        assert_eq!(e.to_string(), "W(-1)*G(l,mu)*W(-1)");
        assert_eq!(e.adjoint().to_string(), "W(-1)*Gm(l,mu)*W(-1)");
        assert!(parse_op("W(-1*G").is_err());
        assert!(parse_op("Foo").is_err());
        assert!(parse_op("G(1)").is_err());
        assert!(parse_op("").is_err());
    }

    #[test]
    fn adjoint_pairing() {
        let g = Grid::new(GridSpec::new(2, 16, 8.0).unwrap()).unwrap();
        let rep = build_clifford(2).unwrap();
        let ctx = OpContext::new(&rep).with_var("l", 0.7).with_var("mu", 0.5);
        let e = parse_op("W(-1)*B*G(l,mu,0.2)*H0(0.3)*W(-1)").unwrap();
        let f = random_field(&g, 2, 1);
        let h = random_field(&g, 2, 2);
        let lhs = e.apply(&ctx, &f).unwrap().inner(&h);
        let rhs = f.inner(&e.adjoint().apply(&ctx, &h).unwrap());
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        assert!(parse_op("G(x,mu)").unwrap().apply(&ctx, &f).is_err());
    }
}
