//! Thin wrappers over `libm` so the crate stays `no_std`.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `|x|^q` with the convention `0^q = 0` for every `q > 0`.
#[inline]
pub(crate) fn abs_pow(x: f64, q: f64) -> f64 {
    let ax = abs(x);
    if ax == 0.0 {
        0.0
    } else {
        powf(ax, q)
    }
}
