// Scalar math that resolves to the std intrinsics when available and to libm
// otherwise, so the same code builds in `no_std`.

macro_rules! unary {
    ($($name:ident => $libm:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 {
                x.$name()
            }

            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 {
                libm::$libm(x)
            }
        )*
    };
}

unary! {
    sqrt => sqrt,
    log10 => log10,
    exp => exp,
    sin => sin,
    cos => cos,
    floor => floor,
    ceil => ceil,
    round => round,
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    y.atan2(x)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
