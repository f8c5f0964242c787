/// A real function on the plane that the contour engine can sample.
///
/// Implementations must be pure: the same point always yields the same
/// bits, whichever thread asks.
pub trait ScalarField: Sync {
    fn value(&self, x: f64, y: f64) -> f64;

    /// Gradient at `(x, y)`; central differences with step `step` unless
    /// overridden.
    fn gradient(&self, x: f64, y: f64, step: f64) -> [f64; 2] {
        let s = step;
        [
            (self.value(x + s, y) - self.value(x - s, y)) / (2.0 * s),
            (self.value(x, y + s) - self.value(x, y - s)) / (2.0 * s),
        ]
    }

    /// Gradient and Hessian `[fxx, fxy, fyy]` at `(x, y)`. The default
    /// takes central differences with step `step`.
    fn derivatives(&self, x: f64, y: f64, step: f64) -> ([f64; 2], [f64; 3]) {
        let s = step;
        let f = |a: f64, b: f64| self.value(a, b);
        let c = f(x, y);
        let (xp, xm, yp, ym) = (f(x + s, y), f(x - s, y), f(x, y + s), f(x, y - s));
        let fxy = (f(x + s, y + s) - f(x + s, y - s) - f(x - s, y + s) + f(x - s, y - s)) / (4.0 * s * s);
        (
            [(xp - xm) / (2.0 * s), (yp - ym) / (2.0 * s)],
            [(xp - 2.0 * c + xm) / (s * s), fxy, (yp - 2.0 * c + ym) / (s * s)],
        )
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn value(&self, x: f64, y: f64) -> f64 {
        (**self).value(x, y)
    }

    fn gradient(&self, x: f64, y: f64, step: f64) -> [f64; 2] {
        (**self).gradient(x, y, step)
    }

    fn derivatives(&self, x: f64, y: f64, step: f64) -> ([f64; 2], [f64; 3]) {
        (**self).derivatives(x, y, step)
    }
}

/// Wraps a closure as a [`ScalarField`]. Handy for analytic test fields.
pub struct FnField<F>(pub F);

impl<F> ScalarField for FnField<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.0)(x, y)
    }
}
