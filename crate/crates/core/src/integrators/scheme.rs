use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Hyperbolic,
    Parabolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approach {
    FullTensor,
    /// Discretize, then project.
    Dtp,
    /// Project, then discretize.
    Ptd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Lie,
    Strang,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Substep {
    ForwardEuler,
    BackwardEuler,
    CrankNicolson,
    Theta(f64),
    SspRk2,
    /// Backward Euler for K and L, forward Euler for S.
    HybridBeFeBe,
}

impl Substep {
    /// θ of a θ-family member.
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Substep::ForwardEuler => Some(0.0),
            Substep::BackwardEuler => Some(1.0),
            Substep::CrankNicolson => Some(0.5),
            Substep::Theta(t) => Some(t),
            Substep::SspRk2 | Substep::HybridBeFeBe => None,
        }
    }
}

impl FromStr for Substep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "forward_euler" => Substep::ForwardEuler,
            "backward_euler" => Substep::BackwardEuler,
            "crank_nicolson" => Substep::CrankNicolson,
            "ssp_rk2" => Substep::SspRk2,
            "hybrid_be_fe_be" => Substep::HybridBeFeBe,
            _ => match s.strip_prefix("theta:") {
                Some(t) => Substep::Theta(parse_theta(t)?),
                None => return Err(Error::Input(format!("unknown substep `{s}`"))),
            },
        })
    }
}

impl fmt::Display for Substep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substep::ForwardEuler => f.write_str("forward_euler"),
            Substep::BackwardEuler => f.write_str("backward_euler"),
            Substep::CrankNicolson => f.write_str("crank_nicolson"),
            Substep::Theta(t) => write!(f, "theta:{t}"),
            Substep::SspRk2 => f.write_str("ssp_rk2"),
            Substep::HybridBeFeBe => f.write_str("hybrid_be_fe_be"),
        }
    }
}

fn parse_theta(t: &str) -> Result<f64> {
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Input(format!("bad theta `{t}`")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Input(format!("theta must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

/// One time-stepping scheme. The step size is passed separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeSpec {
    pub equation: Equation,
    pub approach: Approach,
    /// Ignored for [`Approach::FullTensor`].
    pub splitting: Splitting,
    pub substep: Substep,
}

impl SchemeSpec {
    pub fn new(equation: Equation, approach: Approach, splitting: Splitting, substep: Substep) -> Result<Self> {
        let s = Self {
            equation,
            approach,
            splitting,
            substep,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(format!("{msg} ({self:?})")));
        match self.equation {
            Equation::Hyperbolic => {
                if !matches!(self.substep, Substep::ForwardEuler | Substep::SspRk2) {
                    return bad("hyperbolic schemes use forward_euler or ssp_rk2");
                }
                if self.is_strang() && self.substep != Substep::SspRk2 {
                    return bad("hyperbolic Strang splitting uses ssp_rk2");
                }
            }
            Equation::Parabolic => {
                match self.substep {
                    Substep::SspRk2 => return bad("parabolic schemes use a theta substep or hybrid_be_fe_be"),
                    Substep::Theta(t) if !(0.0..=1.0).contains(&t) => return bad("theta outside [0, 1]"),
                    Substep::HybridBeFeBe => {
                        if self.approach == Approach::FullTensor || self.splitting != Splitting::Lie {
                            return bad("hybrid_be_fe_be needs a low-rank approach with Lie splitting");
                        }
                    }
                    _ => {}
                }
                if self.is_strang() && self.substep.theta() != Some(0.5) {
                    return bad("parabolic Strang splitting uses crank_nicolson");
                }
            }
        }
        Ok(())
    }

    /// Strang splitting on a low-rank approach.
    pub fn is_strang(&self) -> bool {
        self.approach != Approach::FullTensor && self.splitting == Splitting::Strang
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        use Approach::*;
        use Equation::*;
        use Splitting::*;
        let unknown = || Error::Input(format!("unknown scheme `{name}`"));
        let (equation, rest) = if let Some(r) = name.strip_prefix("hyp-") {
            (Hyperbolic, r)
        } else if let Some(r) = name.strip_prefix("par-") {
            (Parabolic, r)
        } else {
            return Err(unknown());
        };
        let (approach, rest) = if let Some(r) = rest.strip_prefix("full-") {
            (FullTensor, r)
        } else if let Some(r) = rest.strip_prefix("dtp-") {
            (Dtp, r)
        } else if let Some(r) = rest.strip_prefix("ptd-") {
            (Ptd, r)
        } else if equation == Parabolic && (rest == "hybrid" || rest == "strang-cn") {
            (Dtp, rest)
        } else {
            return Err(unknown());
        };
        let (splitting, rest) = if approach == FullTensor {
            (Lie, rest)
        } else if let Some(r) = rest.strip_prefix("lie-") {
            (Lie, r)
        } else if let Some(r) = rest.strip_prefix("strang-") {
            (Strang, r)
        } else if rest == "hybrid" {
            (Lie, rest)
        } else {
            return Err(unknown());
        };
        let substep = match (equation, rest) {
            (Hyperbolic, "fe") => Substep::ForwardEuler,
            (Hyperbolic, "rk2") => Substep::SspRk2,
            (Parabolic, "cn") => Substep::CrankNicolson,
            (Parabolic, "hybrid") => Substep::HybridBeFeBe,
            (Parabolic, r) => match r.strip_prefix("theta") {
                Some(t) => Substep::Theta(parse_theta(t)?),
                None => return Err(unknown()),
            },
            _ => return Err(unknown()),
        };
        SchemeSpec::new(equation, approach, splitting, substep)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eq = match self.equation {
            Equation::Hyperbolic => "hyp",
            Equation::Parabolic => "par",
        };
        let ap = match self.approach {
            Approach::FullTensor => "full",
            Approach::Dtp => "dtp",
            Approach::Ptd => "ptd",
        };
        let split = if self.approach == Approach::FullTensor {
            ""
        } else if self.splitting == Splitting::Strang {
            "strang-"
        } else {
            "lie-"
        };
        match (self.equation, self.approach, self.splitting, self.substep) {
            (Equation::Parabolic, Approach::Dtp, Splitting::Lie, Substep::HybridBeFeBe) => {
                f.write_str("par-hybrid")
            }
            (Equation::Parabolic, _, Splitting::Lie, Substep::HybridBeFeBe) => write!(f, "par-{ap}-hybrid"),
            (Equation::Parabolic, Approach::Dtp, Splitting::Strang, _) => f.write_str("par-strang-cn"),
            (Equation::Parabolic, _, _, _) if self.is_strang() => write!(f, "par-{ap}-strang-cn"),
            (Equation::Parabolic, _, _, s) => {
                write!(f, "par-{ap}-{split}theta{}", s.theta().unwrap_or(f64::NAN))
            }
            (Equation::Hyperbolic, _, _, Substep::SspRk2) => write!(f, "{eq}-{ap}-{split}rk2"),
            (Equation::Hyperbolic, _, _, _) => write!(f, "{eq}-{ap}-{split}fe"),
        }
    }
}
