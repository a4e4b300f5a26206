use num_integer::Integer;

/// The projective line over Z/NZ with a canonical representative per class.
///
/// Representatives are the lexicographically smallest pair `(c, d)` of
/// their orbit under scaling by units.
#[derive(Clone, Debug)]
pub struct P1Index {
    level: u64,
    reps: Vec<(u64, u64)>,
    lookup: Vec<u32>,
}

const NONE: u32 = u32::MAX;

pub(crate) fn units_mod(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&u| u.gcd(&n) == 1).collect()
}

impl P1Index {
    pub fn new(level: u64) -> Self {
        assert!(level >= 1);
        let n = level;
        let units = units_mod(n);
        let mut lookup = vec![NONE; (n * n) as usize];
        let mut reps = Vec::new();
        for c in 0..n {
            for d in 0..n {
                if c.gcd(&d).gcd(&n) != 1 || lookup[(c * n + d) as usize] != NONE {
                    continue;
                }
                let idx = reps.len() as u32;
                reps.push((c, d));
                for &u in &units {
                    let key = ((u * c) % n) * n + (u * d) % n;
                    lookup[key as usize] = idx;
                }
            }
        }
        P1Index { level, reps, lookup }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn representatives(&self) -> &[(u64, u64)] {
        &self.reps
    }

    pub fn rep(&self, i: usize) -> (u64, u64) {
        self.reps[i]
    }

    /// Index of the class of `(c : d)`; `None` when `gcd(c, d, N) > 1`.
    pub fn index(&self, c: i64, d: i64) -> Option<usize> {
        let n = self.level as i64;
        let c = c.rem_euclid(n) as u64;
        let d = d.rem_euclid(n) as u64;
        match self.lookup[(c * self.level + d) as usize] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    /// `N * prod_{q | N} (1 + 1/q)`.
    pub fn expected_size(level: u64) -> u64 {
        let mut n = level;
        let mut num = level;
        let mut q = 2;
        while q * q <= n {
            if n % q == 0 {
                num = num / q * (q + 1);
                while n % q == 0 {
                    n /= q;
                }
            }
            q += 1;
        }
        if n > 1 {
            num = num / n * (n + 1);
        }
        num
    }
}
