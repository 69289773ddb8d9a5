use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::chain::ChainParameters;
use crate::error::{Error, Result};

/// A perturbable scalar of [`ChainParameters`], written `m_1`, `I_2`, `r_1`,
/// `a_1`, `beta_1` or `l_2` with the usual 1-based link/joint numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParamId {
    Mass(usize),
    Inertia(usize),
    ComX(usize),
    ComY(usize),
    Damping(usize),
    LinkLength(usize),
}

impl ParamId {
    fn slot<'a>(&self, params: &'a mut ChainParameters) -> Option<&'a mut f64> {
        let link = |i: usize| i.checked_sub(1);
        match *self {
            ParamId::Mass(i) => params.masses.get_mut(link(i)?),
            ParamId::Inertia(i) => params.inertias.get_mut(link(i)?),
            ParamId::ComX(i) => params.com_offsets.get_mut(link(i)?).map(|o| &mut o[0]),
            ParamId::ComY(i) => params.com_offsets.get_mut(link(i)?).map(|o| &mut o[1]),
            ParamId::Damping(j) => params.damping.get_mut(link(j)?),
            ParamId::LinkLength(i) => params.link_lengths.get_mut(i.checked_sub(2)?),
        }
    }

    /// Current value of this parameter in `params`.
    pub fn get(&self, params: &ChainParameters) -> Result<f64> {
        let mut copy = params.clone();
        self.slot(&mut copy)
            .map(|v| *v)
            .ok_or_else(|| Error::Config(format!("{self} does not exist in a {}-link chain", params.n_links())))
    }

    pub fn set(&self, params: &mut ChainParameters, value: f64) -> Result<()> {
        let n = params.n_links();
        let slot = self
            .slot(params)
            .ok_or_else(|| Error::Config(format!("{self} does not exist in a {n}-link chain")))?;
        *slot = value;
        Ok(())
    }

    /// Smallest admissible value.
    fn lower_limit(&self) -> Option<(f64, bool)> {
        match self {
            ParamId::Mass(_) | ParamId::Inertia(_) | ParamId::LinkLength(_) => Some((0.0, false)),
            ParamId::Damping(_) => Some((0.0, true)),
            ParamId::ComX(_) | ParamId::ComY(_) => None,
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamId::Mass(i) => write!(f, "m_{i}"),
            ParamId::Inertia(i) => write!(f, "I_{i}"),
            ParamId::ComX(i) => write!(f, "r_{i}"),
            ParamId::ComY(i) => write!(f, "a_{i}"),
            ParamId::Damping(i) => write!(f, "beta_{i}"),
            ParamId::LinkLength(i) => write!(f, "l_{i}"),
        }
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown parameter name {s:?}"));
        let (name, index) = s.split_once('_').ok_or_else(bad)?;
        let index: usize = index.parse().map_err(|_| bad())?;
        let id = match name {
            "m" => ParamId::Mass(index),
            "I" => ParamId::Inertia(index),
            "r" => ParamId::ComX(index),
            "a" => ParamId::ComY(index),
            "beta" => ParamId::Damping(index),
            "l" => ParamId::LinkLength(index),
            _ => return Err(bad()),
        };
        Ok(id)
    }
}

impl TryFrom<String> for ParamId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParamId> for String {
    fn from(id: ParamId) -> String {
        id.to_string()
    }
}

/// A nominal value with a symmetric bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UncertainRepr")]
pub struct UncertainValue {
    pub nominal: f64,
    pub half_width: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UncertainRepr {
    Notation(String),
    Fields { nominal: f64, half_width: f64 },
}

impl TryFrom<UncertainRepr> for UncertainValue {
    type Error = Error;

    fn try_from(repr: UncertainRepr) -> Result<Self> {
        match repr {
            UncertainRepr::Notation(s) => parse_uncertain(&s),
            UncertainRepr::Fields { nominal, half_width } => {
                if !nominal.is_finite() || half_width < 0.0 || !half_width.is_finite() {
                    return Err(Error::Config(format!("bad bound {nominal} ± {half_width}")));
                }
                Ok(Self { nominal, half_width })
            }
        }
    }
}

/// Parses concise uncertainty notation: the parenthesised digits are the
/// half-width in units of the last printed digit, so `1.5790(76)` is
/// `1.5790 ± 0.0076` and `0.20(4)` is `0.20 ± 0.04`. A bare number has
/// zero half-width.
pub fn parse_uncertain(text: &str) -> Result<UncertainValue> {
    let bad = || Error::Config(format!("cannot parse uncertain value {text:?}"));
    let text = text.trim();
    let (number, digits) = match text.split_once('(') {
        Some((number, rest)) => (number, Some(rest.strip_suffix(')').ok_or_else(bad)?)),
        None => (text, None),
    };
    let nominal: f64 = number.parse().map_err(|_| bad())?;
    if !nominal.is_finite() {
        return Err(bad());
    }
    let half_width = match digits {
        None => 0.0,
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let decimals = number.split_once('.').map_or(0, |(_, frac)| frac.len());
            let count: f64 = d.parse().map_err(|_| bad())?;
            // Parse the scaled literal so 76 × 10⁻⁴ is the nearest double to 0.0076.
            format!("{count}e-{decimals}").parse().map_err(|_| bad())?
        }
    };
    Ok(UncertainValue { nominal, half_width })
}

/// Bounded parameter uncertainty keyed by parameter name. Parameters that
/// are not listed are left untouched by [`perturb_parameters`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterUncertainty {
    pub entries: BTreeMap<ParamId, UncertainValue>,
}

impl ParameterUncertainty {
    /// Table of the two-link acrobat: masses, CoM offsets, inertias and
    /// joint damping.
    pub fn two_link_default() -> Self {
        let table = [
            ("m_1", "1.5790(76)"),
            ("m_2", "1.4370(400)"),
            ("r_1", "0.1443(51)"),
            ("r_2", "0.1268(34)"),
            ("a_1", "-0.0055(5)"),
            ("a_2", "0.0001(2)"),
            ("I_1", "0.0375(13)"),
            ("I_2", "0.0237(9)"),
            ("beta_1", "0.20(4)"),
        ];
        let entries = table
            .iter()
            .map(|(id, v)| (id.parse().unwrap(), parse_uncertain(v).unwrap()))
            .collect();
        Self { entries }
    }

    /// The same table with every half-width set to zero.
    pub fn degenerate(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(id, v)| (*id, UncertainValue { half_width: 0.0, ..*v }))
            .collect();
        Self { entries }
    }

    /// Checks that every entry exists in `params`, that its nominal agrees
    /// with the chain value and that the whole interval is admissible.
    pub fn validate_against(&self, params: &ChainParameters) -> Result<()> {
        for (id, value) in &self.entries {
            let current = id.get(params)?;
            if (current - value.nominal).abs() > 1e-12 * current.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "{id}: uncertainty nominal {} differs from chain value {current}",
                    value.nominal
                )));
            }
            if value.half_width.is_nan() || value.half_width < 0.0 {
                return Err(Error::Config(format!("{id}: negative half-width")));
            }
            if let Some((limit, inclusive)) = id.lower_limit() {
                let low = value.nominal - value.half_width;
                if low < limit || (!inclusive && low == limit) {
                    return Err(Error::Config(format!(
                        "{id}: interval {} ± {} reaches an inadmissible value",
                        value.nominal, value.half_width
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draws each listed parameter uniformly from `[nominal − h, nominal + h]`.
///
/// Entries are visited in name order, one draw each (none for zero width),
/// so a given generator state always yields the same chain.
pub fn perturb_parameters<R: Rng + ?Sized>(
    nominal: &ChainParameters,
    uncertainty: &ParameterUncertainty,
    rng: &mut R,
) -> Result<ChainParameters> {
    uncertainty.validate_against(nominal)?;
    let mut out = nominal.clone();
    for (id, value) in &uncertainty.entries {
        if value.half_width == 0.0 {
            continue;
        }
        let dist = Uniform::new_inclusive(value.nominal - value.half_width, value.nominal + value.half_width)
            .map_err(|e| Error::Config(format!("{id}: {e}")))?;
        id.set(&mut out, dist.sample(rng))?;
    }
    out.validate()
        .map_err(|e| Error::Config(format!("perturbed parameters: {e}")))?;
    Ok(out)
}
