//! Operation accounting for the decoder/detector complexity comparison.
//!
//! Decoder counts follow the per-check-node closed forms for one iteration;
//! a whole-frame figure is counts × number of checks × iterations actually
//! run. Detector work is counted in multiply-accumulates and comparisons per
//! symbol. Gate weights translate both into a common unit so schemes with
//! different operation mixes can be compared; the weights are configurable
//! because only the ratios between schemes are meaningful.

/// Operation tally per check node per decoder iteration. Real-valued
/// because the nonbinary comparison count carries an n_m·log2(n_m) term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OpCounts {
    pub additions: f64,
    pub subtractions: f64,
    pub comparisons: f64,
    pub xors: f64,
}

impl OpCounts {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scaled(&self, k: f64) -> OpCounts {
        OpCounts {
            additions: self.additions * k,
            subtractions: self.subtractions * k,
            comparisons: self.comparisons * k,
            xors: self.xors * k,
        }
    }

    pub fn plus(&self, other: &OpCounts) -> OpCounts {
        OpCounts {
            additions: self.additions + other.additions,
            subtractions: self.subtractions + other.subtractions,
            comparisons: self.comparisons + other.comparisons,
            xors: self.xors + other.xors,
        }
    }
}

/// Min-sum operations per check node iteration for a (d_v, d_c)-regular
/// binary code: d_c additions, d_c subtractions, 2·d_v − 3 comparisons and
/// d_v² − d_v XORs. The comparison term clamps to zero at d_v = 1, where
/// the closed form would go negative.
pub fn ldpc_ops(d_c: usize, d_v: usize) -> OpCounts {
    assert!(d_c >= 2 && d_v >= 1);
    OpCounts {
        additions: d_c as f64,
        subtractions: d_c as f64,
        comparisons: (2 * d_v as i64 - 3).max(0) as f64,
        xors: (d_v * d_v - d_v) as f64,
    }
}

/// Extended min-sum operations per check node iteration, with
/// x = n_m·log2(n_m): additions n_m·(9·d_c + 8·d_v − 22), no subtractions,
/// comparisons x·(6·d_c + 4·d_v − 18) + n_m·(4·d_v − 6) − 2, and
/// XORs n_m·log2(q)·(9·d_c − 18).
pub fn nbldpc_ops(d_c: usize, d_v: usize, n_m: usize, q: usize) -> OpCounts {
    assert!(n_m >= 2);
    let (d_c, d_v, nm) = (d_c as f64, d_v as f64, n_m as f64);
    let x = nm * nm.log2();
    OpCounts {
        additions: nm * (9.0 * d_c + 8.0 * d_v - 22.0),
        subtractions: 0.0,
        comparisons: x * (6.0 * d_c + 4.0 * d_v - 18.0) + nm * (4.0 * d_v - 6.0) - 2.0,
        xors: nm * (q as f64).log2() * (9.0 * d_c - 18.0),
    }
}

/// Gate-level cost model. An adder, subtractor or comparator on b-bit words
/// costs b units, a bit XOR costs 1, and a b-bit multiply-accumulate costs
/// b² + b. `scale` multiplies every weight uniformly, which changes totals
/// but never the ratio of two schemes costed with the same weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateWeights {
    pub bits: u32,
    pub scale: f64,
}

impl Default for GateWeights {
    fn default() -> Self {
        GateWeights { bits: 10, scale: 1.0 }
    }
}

impl GateWeights {
    pub fn add(&self) -> f64 {
        self.scale * self.bits as f64
    }

    pub fn sub(&self) -> f64 {
        self.scale * self.bits as f64
    }

    pub fn cmp(&self) -> f64 {
        self.scale * self.bits as f64
    }

    pub fn xor(&self) -> f64 {
        self.scale
    }

    pub fn mac(&self) -> f64 {
        let b = self.bits as f64;
        self.scale * (b * b + b)
    }

    /// Weighted gate units of one tally.
    pub fn weigh(&self, ops: &OpCounts) -> f64 {
        ops.additions * self.add()
            + ops.subtractions * self.sub()
            + ops.comparisons * self.cmp()
            + ops.xors * self.xor()
    }
}

/// Whole-frame decoder cost in gate units: per-check tally × check count ×
/// average iterations.
pub fn decoder_gate_ops(
    per_iter: &OpCounts,
    num_checks: usize,
    avg_iters: f64,
    weights: &GateWeights,
) -> f64 {
    assert!(avg_iters >= 0.0);
    weights.weigh(per_iter) * num_checks as f64 * avg_iters
}

/// Decoder plus detector cost for one frame.
pub fn total_ops(
    per_iter: &OpCounts,
    num_checks: usize,
    avg_iters: f64,
    weights: &GateWeights,
    detector_ops: f64,
) -> f64 {
    decoder_gate_ops(per_iter, num_checks, avg_iters, weights) + detector_ops
}

/// Go-back-K detector cost: every symbol re-estimates K+1 positions, each a
/// sweep over the L−1 neighbor taps (one multiply-accumulate per tap) plus a
/// threshold decision.
pub fn gbk_detector_ops(n: usize, l: usize, k: usize, weights: &GateWeights) -> f64 {
    let per_symbol =
        ((k + 1) * (l.saturating_sub(1))) as f64 * weights.mac() + (k + 1) as f64 * weights.cmp();
    n as f64 * per_symbol
}

/// Reduced-state BCJR cost: per trellis step, each of the M survivors
/// expands two branches in both the forward and backward passes, a branch
/// metric being one multiply-accumulate plus one compare-and-merge.
pub fn mbcjr_detector_ops(n: usize, m: usize, weights: &GateWeights) -> f64 {
    n as f64 * 4.0 * m as f64 * (weights.mac() + weights.cmp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ldpc_table_point() {
        let ops = ldpc_ops(6, 3);
        assert_eq!(
            (ops.additions, ops.subtractions, ops.comparisons, ops.xors),
            (6.0, 6.0, 3.0, 6.0)
        );
    }

    #[test]
    fn ldpc_small_degrees() {
        assert_eq!(ldpc_ops(6, 2).comparisons, 1.0);
        assert_eq!(ldpc_ops(6, 2).xors, 2.0);
        assert_eq!(ldpc_ops(2, 3).additions, 2.0);
    }

    #[test]
    fn nbldpc_table_point() {
        let ops = nbldpc_ops(4, 2, 20, 64);
        assert_eq!(ops.additions, 600.0);
        assert_eq!(ops.subtractions, 0.0);
        assert_eq!(ops.xors, 2160.0);
        assert!((ops.comparisons - 1248.1398665684616).abs() < 1e-9);
    }

    #[test]
    fn nbldpc_degenerate_check_degree_has_no_xors() {
        assert_eq!(nbldpc_ops(2, 2, 20, 64).xors, 0.0);
    }

    #[test]
    fn formulas_match_independent_expansion() {
        // Same closed forms written out term by term.
        for d_c in 2..8 {
            for d_v in 2..5 {
                let ops = ldpc_ops(d_c, d_v);
                assert_eq!(ops.additions, d_c as f64);
                assert_eq!(ops.subtractions, d_c as f64);
                assert_eq!(ops.comparisons, 2.0 * d_v as f64 - 3.0);
                assert_eq!(ops.xors, (d_v as f64).powi(2) - d_v as f64);
            }
        }
        // Degree-1 columns clamp the comparison count instead of going
        // negative.
        let lone = ldpc_ops(4, 1);
        assert_eq!((lone.comparisons, lone.xors), (0.0, 0.0));
        for d_c in 2..8 {
            for d_v in 2..5 {
                for n_m in [2usize, 8, 20, 32] {
                    for q in [16usize, 64, 256] {
                        let ops = nbldpc_ops(d_c, d_v, n_m, q);
                        let nm = n_m as f64;
                        let adds = 9.0 * d_c as f64 * nm + 8.0 * d_v as f64 * nm - 22.0 * nm;
                        let x = nm * nm.log2();
                        let cmps = 6.0 * d_c as f64 * x + 4.0 * d_v as f64 * x - 18.0 * x
                            + 4.0 * d_v as f64 * nm
                            - 6.0 * nm
                            - 2.0;
                        let xors = nm * (q as f64).log2() * 9.0 * (d_c as f64 - 2.0);
                        assert!((ops.additions - adds).abs() < 1e-9);
                        assert!((ops.comparisons - cmps).abs() < 1e-9);
                        assert!((ops.xors - xors).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn totals_linear_in_iterations_and_scale() {
        let w = GateWeights::default();
        let per = nbldpc_ops(4, 2, 20, 64);
        let one = decoder_gate_ops(&per, 10, 1.0, &w);
        let two = decoder_gate_ops(&per, 10, 2.0, &w);
        assert!((two - 2.0 * one).abs() < 1e-9);
        assert_eq!(total_ops(&per, 10, 0.0, &w, 123.0), 123.0);

        // A uniform weight override rescales totals, not ratios.
        let w2 = GateWeights { scale: 3.0, ..w };
        let a1 = decoder_gate_ops(&ldpc_ops(6, 3), 64, 4.0, &w);
        let b1 = decoder_gate_ops(&per, 10, 4.0, &w);
        let a2 = decoder_gate_ops(&ldpc_ops(6, 3), 64, 4.0, &w2);
        let b2 = decoder_gate_ops(&per, 10, 4.0, &w2);
        assert!((a2 / a1 - 3.0).abs() < 1e-12);
        assert!((a2 / b2 - a1 / b1).abs() < 1e-12);
    }

    #[test]
    fn default_weights() {
        let w = GateWeights::default();
        assert_eq!(w.add(), 10.0);
        assert_eq!(w.xor(), 1.0);
        assert_eq!(w.mac(), 110.0);
    }

    #[test]
    fn detector_costs_scale_with_frame_and_state() {
        let w = GateWeights::default();
        // K = 1, L = 10: 2 passes over 9 taps plus 2 decisions per symbol.
        let gbk = gbk_detector_ops(100, 10, 1, &w);
        assert_eq!(gbk, 100.0 * (18.0 * 110.0 + 2.0 * 10.0));
        let bcjr = mbcjr_detector_ops(100, 32, &w);
        assert_eq!(bcjr, 100.0 * 4.0 * 32.0 * 120.0);
        assert!(bcjr > gbk);
    }
}
