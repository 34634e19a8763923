//! The polarization pointer qubit and the six analyzer projectors.
//!
//! Basis: `|0> = (|H> + |V>)/sqrt2`, `|1> = (|H> - |V>)/sqrt2`. The analyzer
//! projects onto `|0>, |1>`, `|+-> = (|0> +- |1>)/sqrt2` and
//! `|L>, |R> = (|0> +- i|1>)/sqrt2`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

/// Possibly unnormalized pointer state `a0|0> + a1|1>`. After post-selection
/// the squared norm is the post-selection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerState {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl PointerState {
    pub fn new(a0: Complex64, a1: Complex64) -> Self {
        Self { a0, a1 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| Self::new(self.a0 / n, self.a1 / n))
    }

    /// `<proj|self>`.
    pub fn overlap(&self, proj: PointerProjector) -> Complex64 {
        let (b0, b1) = proj.vector();
        b0.conj() * self.a0 + b1.conj() * self.a1
    }

    pub fn prob(&self, proj: PointerProjector) -> f64 {
        self.overlap(proj).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointerProjector {
    P0,
    P1,
    Plus,
    Minus,
    Left,
    Right,
}

impl PointerProjector {
    pub const ALL: [PointerProjector; 6] = [
        PointerProjector::P0,
        PointerProjector::P1,
        PointerProjector::Plus,
        PointerProjector::Minus,
        PointerProjector::Left,
        PointerProjector::Right,
    ];

    /// Components of the projector's ket on `{|0>, |1>}`.
    pub fn vector(self) -> (Complex64, Complex64) {
        let s = FRAC_1_SQRT_2;
        let c = |re, im| Complex64::new(re, im);
        match self {
            PointerProjector::P0 => (c(1.0, 0.0), c(0.0, 0.0)),
            PointerProjector::P1 => (c(0.0, 0.0), c(1.0, 0.0)),
            PointerProjector::Plus => (c(s, 0.0), c(s, 0.0)),
            PointerProjector::Minus => (c(s, 0.0), c(-s, 0.0)),
            PointerProjector::Left => (c(s, 0.0), c(0.0, s)),
            PointerProjector::Right => (c(s, 0.0), c(0.0, -s)),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// The three analyzer settings, each resolving two orthogonal projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `{|+>, |->}`
    Diagonal,
    /// `{|0>, |1>}`
    Computational,
    /// `{|L>, |R>}`
    Circular,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Diagonal, Basis::Computational, Basis::Circular];

    pub fn projectors(self) -> [PointerProjector; 2] {
        match self {
            Basis::Diagonal => [PointerProjector::Plus, PointerProjector::Minus],
            Basis::Computational => [PointerProjector::P0, PointerProjector::P1],
            Basis::Circular => [PointerProjector::Left, PointerProjector::Right],
        }
    }
}

/// A value per projector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProjectorMap<T>(pub [T; 6]);

impl<T> Index<PointerProjector> for ProjectorMap<T> {
    type Output = T;
    fn index(&self, p: PointerProjector) -> &T {
        &self.0[p.slot()]
    }
}

impl<T> IndexMut<PointerProjector> for ProjectorMap<T> {
    fn index_mut(&mut self, p: PointerProjector) -> &mut T {
        &mut self.0[p.slot()]
    }
}

impl<T: Copy> ProjectorMap<T> {
    pub fn from_fn(mut f: impl FnMut(PointerProjector) -> T) -> Self {
        Self(PointerProjector::ALL.map(&mut f))
    }

    /// Values of the two projectors of `basis`.
    pub fn pair(&self, basis: Basis) -> (T, T) {
        let [a, b] = basis.projectors();
        (self[a], self[b])
    }
}

/// Exact projector probabilities of the (unnormalized) pointer state.
pub fn readout_probs(p: &PointerState) -> ProjectorMap<f64> {
    ProjectorMap::from_fn(|proj| p.prob(proj))
}
