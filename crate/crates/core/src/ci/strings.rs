//! Occupation strings and their single-excitation tables.

/// All n-bit strings with `k` bits set, ascending.
pub fn enumerate_strings(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut s: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while s < limit {
        out.push(s);
        // Gosper's hack: next integer with the same popcount.
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

/// Parity of occupied orbitals strictly below `p`.
#[inline]
pub fn parity_below(s: u64, p: usize) -> f64 {
    if (s & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// a†_p a_q |s⟩ = sign |t⟩, or None.
#[inline]
pub fn excite(s: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    if s >> q & 1 == 0 {
        return None;
    }
    let s1 = s ^ (1 << q);
    if s1 >> p & 1 == 1 {
        return None;
    }
    let sign = parity_below(s, q) * parity_below(s1, p);
    Some((s1 | (1 << p), sign))
}

/// One entry of a single-excitation table: E_pq |I⟩ = sign |J⟩.
#[derive(Debug, Clone, Copy)]
pub struct Excitation {
    pub pq: u32,
    pub target: u32,
    pub sign: f64,
}

/// For every string, every non-vanishing E_pq (diagonal included).
pub fn single_excitations(strings: &[u64], n_orb: usize) -> Vec<Vec<Excitation>> {
    let index: std::collections::HashMap<u64, u32> = strings.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    strings
        .iter()
        .map(|&s| {
            let mut v = Vec::new();
            for q in 0..n_orb {
                for p in 0..n_orb {
                    if let Some((t, sign)) = excite(s, p, q) {
                        v.push(Excitation {
                            pq: (p * n_orb + q) as u32,
                            target: index[&t],
                            sign,
                        });
                    }
                }
            }
            v
        })
        .collect()
}
