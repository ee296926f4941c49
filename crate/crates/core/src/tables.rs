//! Ready-to-use 16-pole filters.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::Error;
use crate::filter::RationalFilter;
use crate::scalar::Real;

/// Tabulated 16-pole filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFilter {
    GaussLegendre16,
    Zolotarev16,
    /// Box-constrained least-squares filter started from Zolotarev16 with
    /// `|Im w| >= 0.0022`.
    BoxLbfgsb16,
    GammaSlise16,
    EnhancedGammaSlise16,
}

type Row = ((f64, f64), (f64, f64));

const GAUSS_LEGENDRE_16: [Row; 4] = [
    ((-0.9980552138505067, 0.062336105956370486), (0.02525791710871586, -0.0015775481910044564)),
    ((-0.9494253842988177, 0.3139927382100546), (0.05278354977406013, -0.017456507483534722)),
    ((-0.7348899387554323, 0.678186388770961), (0.05763496444397823, -0.05318789432545047)),
    ((-0.2841679239019292, 0.9587745256428074), (0.025765774438829884, -0.0869329930919054)),
];

const ZOLOTAREV_16: [Row; 4] = [
    ((-0.9999975815339606, 0.0021993013049440135), (0.0008989201462643977, -1.977001032029609E-6)),
    ((-0.9998514744807556, 0.017234528675274002), (0.005245791227192865, -9.042216932920706E-5)),
    ((-0.9933358764099828, 0.11525552757595411), (0.03462538525214074, -0.004017540430714314)),
    ((-0.7398348571484926, 0.6727885136861876), (0.15051737271560608, -0.13687697801045523)),
];

const BOX_LBFGSB_16: [Row; 4] = [
    ((-0.9999983713139353, 0.0022), (0.0010905705446617412, -1.4902889756769852E-6)),
    ((-0.9998476756269521, 0.023174916170735475), (0.007300520076462563, -0.00010162408356932002)),
    ((-0.9897979425768154, 0.15300422557734145), (0.0435127109551866, -0.006058193629191226)),
    ((-0.6868662884959791, 0.7440732728350293), (0.1355339692180714, -0.14590122484259907)),
];

const GAMMA_SLISE_16: [Row; 4] = [
    ((-0.9997180876994749, 0.010064168904151764), (0.005218903896671892, -0.0003275342117714203)),
    ((-0.985330269864567, 0.08344015646402761), (0.019780578125967584, -0.005308415315997665)),
    ((-0.8908400599591626, 0.30261876848986174), (0.053241710348050676, -0.03215097589453323)),
    ((-0.43598745582039683, 0.6982671139969543), (0.05378661362857605, -0.12118676200021669)),
];

const ENHANCED_GAMMA_SLISE_16: [Row; 4] = [
    ((-0.995102777784057, 0.01971965034279112), (0.007451889566376135, -0.0023538898767857387)),
    ((-0.9656137585011698, 0.09822459880633161), (0.019581536492404246, -0.00823771601370859)),
    ((-0.8531623369434934, 0.30357032990253513), (0.04865850681408789, -0.033809650419106246)),
    ((-0.4113331147792164, 0.6641012378282691), (0.04909233881671418, -0.11480784939181093)),
];

impl BuiltinFilter {
    pub const ALL: [BuiltinFilter; 5] = [
        BuiltinFilter::GaussLegendre16,
        BuiltinFilter::Zolotarev16,
        BuiltinFilter::BoxLbfgsb16,
        BuiltinFilter::GammaSlise16,
        BuiltinFilter::EnhancedGammaSlise16,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinFilter::GaussLegendre16 => "gauss-legendre16",
            BuiltinFilter::Zolotarev16 => "zolotarev16",
            BuiltinFilter::BoxLbfgsb16 => "box-lbfgsb16",
            BuiltinFilter::GammaSlise16 => "gamma-slise16",
            BuiltinFilter::EnhancedGammaSlise16 => "enhanced-gamma-slise16",
        }
    }

    fn rows(self) -> &'static [Row; 4] {
        match self {
            BuiltinFilter::GaussLegendre16 => &GAUSS_LEGENDRE_16,
            BuiltinFilter::Zolotarev16 => &ZOLOTAREV_16,
            BuiltinFilter::BoxLbfgsb16 => &BOX_LBFGSB_16,
            BuiltinFilter::GammaSlise16 => &GAMMA_SLISE_16,
            BuiltinFilter::EnhancedGammaSlise16 => &ENHANCED_GAMMA_SLISE_16,
        }
    }

    pub fn filter<T: Real>(self) -> RationalFilter<T> {
        let (poles, coeffs) = self
            .rows()
            .iter()
            .map(|&((wr, wi), (br, bi))| (Complex::new(T::lit(wr), T::lit(wi)), Complex::new(T::lit(br), T::lit(bi))))
            .unzip();
        RationalFilter::new(poles, coeffs).expect("tabulated filters are valid")
    }
}

impl fmt::Display for BuiltinFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Self::ALL
            .into_iter()
            .find(|b| b.name() == key)
            .ok_or_else(|| Error::Lookup { kind: "builtin filter", name: s.to_string() })
    }
}

/// Convenience wrapper over [`BuiltinFilter::filter`].
pub fn builtin_filter<T: Real>(name: BuiltinFilter) -> RationalFilter<T> {
    name.filter()
}
