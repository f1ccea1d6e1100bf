use std::fmt;

/// A node of the index tree `Θ = ∪_n ℕ_0^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThetaIndex(Vec<u64>);

impl ThetaIndex {
    /// # Panics
    /// On an empty path.
    pub fn new(path: Vec<u64>) -> Self {
        assert!(!path.is_empty(), "ThetaIndex path must be nonempty");
        Self(path)
    }

    /// The root index `θ = (0)`.
    pub fn root() -> Self {
        Self(vec![0])
    }

    /// Top-level index `(i)` of the `i`-th Monte-Carlo sample.
    pub fn sample(i: u64) -> Self {
        Self(vec![i])
    }

    /// `(θ, n, k, ℓ)`.
    pub fn child(&self, n: usize, k: usize, l: usize) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 3);
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&[n as u64, k as u64, l as u64]);
        Self(v)
    }

    pub fn path(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for ThetaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
