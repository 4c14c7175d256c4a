//! Adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued integrands.

// nodes and weights are quoted at full published precision
#![allow(clippy::excessive_precision)]

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 2000;

fn kronrod_segment<T: Scalar, F>(f: &F, a: T, b: T) -> (DVector<T>, T)
where
    F: Fn(T) -> DVector<T>,
{
    let two = T::lit(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;
    let fc = f(center);
    let mut kronrod = &fc * T::lit(WGK[7]);
    let mut gauss = &fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let sum = f1 + f2;
        kronrod += &sum * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += &sum * T::lit(WG[j / 2]);
        }
    }
    kronrod *= half;
    gauss *= half;
    let err = (&kronrod - &gauss).amax();
    (kronrod, err)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` (max-norm).
pub fn integrate<T: Scalar, F>(f: F, a: T, b: T, dim: usize, tol: T) -> Result<DVector<T>>
where
    F: Fn(T) -> DVector<T>,
{
    if a == b {
        return Ok(DVector::zeros(dim));
    }
    let mut segments = vec![(a, b, kronrod_segment(&f, a, b))];
    loop {
        let total_err = segments.iter().fold(T::zero(), |acc, s| acc + s.2 .1);
        if total_err <= tol {
            break;
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge: error estimate {total_err}"
            )));
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, T::zero()), |best, (i, s)| if s.2 .1 > best.1 { (i, s.2 .1) } else { best });
        let (lo, hi, _) = segments.swap_remove(worst);
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            return Err(Error::Numeric(format!("quadrature interval collapsed near {mid}")));
        }
        segments.push((lo, mid, kronrod_segment(&f, lo, mid)));
        segments.push((mid, hi, kronrod_segment(&f, mid, hi)));
    }
    // sum in position order for reproducibility
    segments.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite bounds"));
    Ok(segments.into_iter().fold(DVector::zeros(dim), |acc, s| acc + s.2 .0))
}
