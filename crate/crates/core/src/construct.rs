//! Hand-built rules with known closed-form dynamics.
//!
//! A pair of rectifiers `relu(u) - relu(-u) = u` lets the two-layer network
//! represent any affine map of the perception vector exactly, which turns the
//! network into a linear PDE (heat equation, exponential decay, ...) whose
//! solution is known analytically.

use alloc::vec::Vec;

use crate::weights::{RuleWeights, Variant};

#[derive(Debug, Clone, Copy)]
struct Term {
    output: usize,
    input: Option<usize>,
    coeff: f32,
    offset: f32,
}

/// Builder for a rule whose residual is an affine function of the
/// perception vector: `ΔS_c = Σ coeff · z_j + offset` over the added terms.
#[derive(Debug, Clone)]
pub struct LinearRule {
    channels: usize,
    variant: Variant,
    terms: Vec<Term>,
}

impl LinearRule {
    pub fn new(channels: usize, variant: Variant) -> Self {
        Self {
            channels,
            variant,
            terms: Vec::new(),
        }
    }

    /// `ΔS_output += coeff · z_input`.
    pub fn term(self, output: usize, input: usize, coeff: f32) -> Self {
        self.affine(output, input, coeff, 0.0)
    }

    /// `ΔS_output += coeff · z_input + offset`.
    pub fn affine(mut self, output: usize, input: usize, coeff: f32, offset: f32) -> Self {
        self.terms.push(Term {
            output,
            input: Some(input),
            coeff,
            offset,
        });
        self
    }

    /// `ΔS_output += value`, independent of the state.
    pub fn constant(mut self, output: usize, value: f32) -> Self {
        self.terms.push(Term {
            output,
            input: None,
            coeff: 0.0,
            offset: value,
        });
        self
    }

    /// Heat equation `∂S/∂t = α ∇²S` on every channel.
    pub fn laplacian(self, alpha: f32) -> Self {
        let c = self.channels;
        (0..c).fold(self, |r, ch| r.term(ch, 3 * c + ch, alpha))
    }

    /// Exponential decay `∂S/∂t = -k S` on every channel.
    pub fn decay(self, k: f32) -> Self {
        (0..self.channels).fold(self, |r, ch| r.term(ch, ch, -k))
    }

    /// `∂S/∂t = S - target` on every channel (unstable, root at `target`).
    pub fn offset_identity(self, target: &[f32]) -> Self {
        (0..self.channels).fold(self, |r, ch| r.affine(ch, ch, 1.0, -target[ch]))
    }

    pub fn build(&self) -> RuleWeights {
        let units: usize = self.terms.iter().map(|t| if t.input.is_some() { 2 } else { 1 }).sum();
        let mut w = RuleWeights::zeros(self.channels, units.max(1), self.variant);
        let inputs = w.inputs();
        let hidden = w.hidden;
        let mut d = 0;
        for t in &self.terms {
            match t.input {
                Some(j) => {
                    w.w1[d * inputs + j] = t.coeff;
                    w.b1[d] = t.offset;
                    w.w2[t.output * hidden + d] = 1.0;
                    w.w1[(d + 1) * inputs + j] = -t.coeff;
                    w.b1[d + 1] = -t.offset;
                    w.w2[t.output * hidden + d + 1] = -1.0;
                    d += 2;
                }
                None => {
                    w.b1[d] = t.offset.abs();
                    w.w2[t.output * hidden + d] = if t.offset < 0.0 { -1.0 } else { 1.0 };
                    d += 1;
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_rules_validate() {
        for v in [Variant::Vanilla, Variant::Pe, Variant::Noise] {
            let w = LinearRule::new(3, v)
                .laplacian(0.1)
                .decay(0.2)
                .constant(1, -0.5)
                .build();
            assert_eq!(w.validate(), Ok(()));
            assert_eq!(w.hidden, 13);
        }
    }

    #[test]
    fn empty_rule_is_zero() {
        let w = LinearRule::new(3, Variant::Noise).build();
        assert!(w.w2.iter().all(|&v| v == 0.0));
    }
}
