//! Independent oracles and data builders shared by the integration and
//! acceptance suites. Everything here recomputes expected values from
//! first principles (enumeration, combinatorics, closed forms) without
//! touching the production code paths it checks.
#![allow(dead_code)] // each test binary uses its own subset

use casesens::study::{MatchedSet, Study};

/// `Pr(Σ Bernoulli(p_i) >= k)` by enumerating all 2^n outcomes.
pub fn enumerate_tail_ge(probs: &[f64], k: usize) -> f64 {
    let n = probs.len();
    assert!(n <= 20, "enumeration oracle is exponential");
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let successes = mask.count_ones() as usize;
        if successes < k {
            continue;
        }
        let mut w = 1.0;
        for (i, p) in probs.iter().enumerate() {
            w *= if mask >> i & 1 == 1 { *p } else { 1.0 - *p };
        }
        total += w;
    }
    total
}

/// The `b`th elementary symmetric function of `values`.
fn elementary_symmetric(values: &[f64], b: usize) -> f64 {
    // poly[j] accumulates S_j as each value multiplies in.
    let mut poly = vec![0.0; values.len() + 1];
    poly[0] = 1.0;
    for &v in values {
        for j in (1..poly.len()).rev() {
            poly[j] += poly[j - 1] * v;
        }
    }
    poly[b]
}

/// Sharp bounds on the narrow-set case-exposure probability by brute
/// force: the closed per-allocation probability is optimized over every
/// confounder vertex `u ∈ {0,1}^J` and every admissible always-case risk
/// ratio in `ratios` (`{1, Θ}` for the one-sided model, `{Θ⁻¹, 1, Θ}` for
/// the symmetric one).
pub fn esf_bounds_brute_force(m: u32, j: u32, gamma: f64, ratios: &[f64]) -> (f64, f64) {
    assert!((1..j).contains(&m), "interior m only; ends are point masses");
    let j = j as usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mask in 0u32..(1 << j) {
        let case_u = f64::from(mask & 1);
        let referent_omegas: Vec<f64> =
            (1..j).map(|pos| gamma.powf(f64::from(mask >> pos & 1))).collect();
        let s_lo = elementary_symmetric(&referent_omegas, m as usize - 1);
        let s_hi = elementary_symmetric(&referent_omegas, m as usize);
        for &ratio in ratios {
            let a = ratio * gamma.powf(case_u) * s_lo;
            let p = a / (a + s_hi);
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    (lo, hi)
}

/// Exhaustive minimum assignment cost: every way of giving each case `k`
/// distinct referents.
pub fn brute_force_assignment(cost: &[Vec<f64>], k: usize) -> f64 {
    fn rec(cost: &[Vec<f64>], k: usize, case: usize, used: &mut Vec<bool>) -> f64 {
        if case == cost.len() {
            return 0.0;
        }
        let free: Vec<usize> = (0..used.len()).filter(|&r| !used[r]).collect();
        let mut best = f64::INFINITY;
        let mut choice = vec![0usize; k];
        combos(cost, k, case, &free, 0, &mut choice, 0, used, &mut best);
        best
    }
    #[allow(clippy::too_many_arguments)]
    fn combos(
        cost: &[Vec<f64>],
        k: usize,
        case: usize,
        free: &[usize],
        start: usize,
        choice: &mut Vec<usize>,
        depth: usize,
        used: &mut Vec<bool>,
        best: &mut f64,
    ) {
        if depth == k {
            let here: f64 = choice.iter().map(|&r| cost[case][r]).sum();
            for &r in choice.iter() {
                used[r] = true;
            }
            let rest = rec(cost, k, case + 1, used);
            for &r in choice.iter() {
                used[r] = false;
            }
            *best = best.min(here + rest);
            return;
        }
        for i in start..free.len() {
            choice[depth] = free[i];
            combos(cost, k, case, free, i + 1, choice, depth + 1, used, best);
        }
    }
    let mut used = vec![false; cost[0].len()];
    rec(cost, k, 0, &mut used)
}

fn binom_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    c
}

/// Classical randomization p-value `Pr(Y >= Y_obs)` by direct conditional
/// enumeration: each set has `C(J, m)` equally likely exposure
/// allocations, the case exposed in `C(J-1, m-1)` of them; the joint space
/// of case-exposure vectors is enumerated with those combinatorial
/// weights.
pub fn mh_enumeration_pvalue(study: &Study) -> f64 {
    let sets = study.sets();
    assert!(sets.len() <= 12, "enumeration oracle is exponential");
    let weights: Vec<f64> = sets
        .iter()
        .map(|s| {
            let total = binom_u128(s.size, s.exposed_count);
            let case_exposed = if s.exposed_count == 0 {
                0
            } else {
                binom_u128(s.size - 1, s.exposed_count - 1)
            };
            case_exposed as f64 / total as f64
        })
        .collect();
    let observed = study.statistic_broad() as usize;
    let mut total = 0.0;
    for mask in 0u32..(1 << sets.len()) {
        if (mask.count_ones() as usize) < observed {
            continue;
        }
        let mut w = 1.0;
        for (i, p) in weights.iter().enumerate() {
            w *= if mask >> i & 1 == 1 { *p } else { 1.0 - *p };
        }
        total += w;
    }
    total
}

/// A deterministic pseudo-random valid study, sized for enumeration or
/// larger property checks.
pub fn seeded_study(n_sets: usize, j: u32, seed: u64) -> Study {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let sets = (1..=n_sets as u64)
        .map(|set_id| {
            let r = next();
            let case_exposed = r & 1 == 1;
            let exposed_refs = (r >> 1) as u32 % j; // 0..=J-1
            MatchedSet {
                set_id,
                size: j,
                exposed_count: exposed_refs + u32::from(case_exposed),
                case_exposed,
                is_narrow: r >> 33 & 1 == 1,
            }
        })
        .collect();
    Study::new(sets).unwrap()
}

/// A synthetic study mimicking published marginals: 809 sets of size 6,
/// 620 of them narrow, case exposure 547/809 (exposure odds ratio ~3.35
/// against referents at 38.4%), narrow-case exposure 439/620 (odds ratio
/// ~3.89). Referent exposure counts follow the Binomial(5, 0.384) pmf by
/// largest-remainder allocation, spread over sets by a fixed coprime
/// shuffle. Fully deterministic.
pub fn published_marginals_study() -> Study {
    let n_sets = 809usize;
    let n_narrow = 620usize;
    let exposed_cases = 547usize;
    let exposed_narrow_cases = 439usize;
    let p_ref = 0.384f64;
    let j = 6u32;

    // Largest-remainder allocation of referent exposure counts.
    let pmf: Vec<f64> = (0..j)
        .map(|k| {
            binom_u128(j - 1, k) as f64
                * p_ref.powi(k as i32)
                * (1.0 - p_ref).powi((j - 1 - k) as i32)
        })
        .collect();
    let mut alloc: Vec<usize> = pmf.iter().map(|p| (p * n_sets as f64).floor() as usize).collect();
    let mut remainders: Vec<(f64, usize)> = pmf
        .iter()
        .enumerate()
        .map(|(k, p)| (p * n_sets as f64 - alloc[k] as f64, k))
        .collect();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut short = n_sets - alloc.iter().sum::<usize>();
    for &(_, k) in &remainders {
        if short == 0 {
            break;
        }
        alloc[k] += 1;
        short -= 1;
    }

    let mut ref_counts = vec![0u32; n_sets];
    let mut order: Vec<usize> = (0..n_sets).collect();
    order.sort_by_key(|&i| (i * 37) % n_sets);
    let mut pool: Vec<u32> = Vec::with_capacity(n_sets);
    for (k, &count) in alloc.iter().enumerate() {
        pool.extend(std::iter::repeat_n(k as u32, count));
    }
    for (slot, &set_idx) in order.iter().enumerate() {
        ref_counts[set_idx] = pool[slot];
    }

    let sets = (0..n_sets)
        .map(|i| {
            let is_narrow = i < n_narrow;
            let case_exposed = if is_narrow {
                i < exposed_narrow_cases
            } else {
                i - n_narrow < exposed_cases - exposed_narrow_cases
            };
            MatchedSet {
                set_id: i as u64 + 1,
                size: j,
                exposed_count: ref_counts[i] + u32::from(case_exposed),
                case_exposed,
                is_narrow,
            }
        })
        .collect();
    Study::new(sets).unwrap()
}
