/// Enumerates set partitions of `0..len` into at most `max_blocks` blocks as
/// restricted growth strings `a` with `a[0] = 0` and
/// `a[i] <= 1 + max(a[..i])`, in lexicographic order.
///
/// ```
/// use subspace_fit::union::RestrictedGrowth;
/// let mut rgs = RestrictedGrowth::new(3, 2);
/// let mut seen = Vec::new();
/// while let Some(a) = rgs.next_partition() {
///     seen.push(a.to_vec());
/// }
/// assert_eq!(seen, vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]]);
/// ```
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    current: Vec<usize>,
    // prefix_max[i] = max(current[..=i])
    prefix_max: Vec<usize>,
    max_blocks: usize,
    state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    Running,
    Done,
}

impl RestrictedGrowth {
    pub fn new(len: usize, max_blocks: usize) -> Self {
        let state = if max_blocks == 0 && len > 0 {
            State::Done
        } else {
            State::Fresh
        };
        RestrictedGrowth {
            current: vec![0; len],
            prefix_max: vec![0; len],
            max_blocks,
            state,
        }
    }

    /// Advances and returns the next string, or `None` when exhausted.
    pub fn next_partition(&mut self) -> Option<&[usize]> {
        match self.state {
            State::Done => return None,
            State::Fresh => {
                self.state = State::Running;
                return Some(&self.current);
            }
            State::Running => {}
        }
        let n = self.current.len();
        let pivot = (1..n).rev().find(|&i| {
            let a = self.current[i];
            a + 1 < self.max_blocks && a <= self.prefix_max[i - 1]
        });
        let Some(i) = pivot else {
            self.state = State::Done;
            return None;
        };
        self.current[i] += 1;
        self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
        for j in (i + 1)..n {
            self.current[j] = 0;
            self.prefix_max[j] = self.prefix_max[i];
        }
        Some(&self.current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(len: usize, blocks: usize) -> usize {
        let mut g = RestrictedGrowth::new(len, blocks);
        let mut c = 0;
        while g.next_partition().is_some() {
            c += 1;
        }
        c
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, b) in bell.iter().enumerate() {
            assert_eq!(count(n, n.max(1)), *b, "n = {n}");
        }
    }

    #[test]
    fn two_blocks() {
        for n in 1..10 {
            assert_eq!(count(n, 2), 1 << (n - 1));
        }
        assert_eq!(count(4, 1), 1);
    }

    #[test]
    fn stirling_sums() {
        // S(6,1) + S(6,2) + S(6,3) = 1 + 31 + 90
        assert_eq!(count(6, 3), 122);
    }

    #[test]
    fn strings_are_valid_and_distinct() {
        let mut g = RestrictedGrowth::new(6, 3);
        let mut all = std::collections::BTreeSet::new();
        while let Some(a) = g.next_partition() {
            assert_eq!(a[0], 0);
            let mut mx = 0;
            for &x in &a[1..] {
                assert!(x <= mx + 1 && x < 3);
                mx = mx.max(x);
            }
            assert!(all.insert(a.to_vec()));
        }
    }
}
