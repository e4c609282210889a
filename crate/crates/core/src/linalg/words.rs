use super::matrix::{family_dim, SquareMatrix};
use crate::error::{Error, Result};

/// Products `A_{i1}···A_{ik}` for `1 ≤ k ≤ max_len`, in shortlex order of the index word.
pub struct Words<'a> {
    family: &'a [SquareMatrix],
    max_len: usize,
    word: Vec<usize>,
    // prefix[i] = product of the first i+1 letters
    prefix: Vec<SquareMatrix>,
    done: bool,
}

pub fn enumerate_words(family: &[SquareMatrix], max_len: usize) -> Result<Words<'_>> {
    family_dim(family)?;
    if max_len == 0 {
        return Err(Error::PreconditionFailed("maxLen must be at least 1".into()));
    }
    Ok(Words { family, max_len, word: Vec::new(), prefix: Vec::new(), done: false })
}

impl Words<'_> {
    fn rebuild_from(&mut self, start: usize) {
        self.prefix.truncate(start);
        for i in start..self.word.len() {
            let next = match self.prefix.last() {
                Some(p) => p.mul(&self.family[self.word[i]]),
                None => self.family[self.word[i]].clone(),
            };
            self.prefix.push(next);
        }
    }
}

impl Iterator for Words<'_> {
    type Item = (Vec<usize>, SquareMatrix);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let k = self.family.len();
        if self.word.is_empty() {
            self.word.push(0);
            self.rebuild_from(0);
        } else {
            // increment as a base-k counter; on overflow grow the length
            let mut pos = self.word.len();
            loop {
                if pos == 0 {
                    let len = self.word.len() + 1;
                    if len > self.max_len {
                        self.done = true;
                        return None;
                    }
                    self.word = vec![0; len];
                    self.rebuild_from(0);
                    break;
                }
                pos -= 1;
                if self.word[pos] + 1 < k {
                    self.word[pos] += 1;
                    for w in self.word.iter_mut().skip(pos + 1) {
                        *w = 0;
                    }
                    self.rebuild_from(pos);
                    break;
                }
            }
        }
        Some((self.word.clone(), self.prefix.last().expect("nonempty word").clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_matrix() {
        let a = SquareMatrix::diag(&[2.0, 3.0]);
        let w: Vec<_> = enumerate_words(std::slice::from_ref(&a), 2).unwrap().collect();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].1, SquareMatrix::diag(&[4.0, 9.0]));
    }

    #[test]
    fn shortlex_order() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let b = SquareMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let fam = [a.clone(), b.clone()];
        let w: Vec<_> = enumerate_words(&fam, 2).unwrap().collect();
        let words: Vec<Vec<usize>> = w.iter().map(|x| x.0.clone()).collect();
        assert_eq!(words, vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(w[3].1, a.mul(&b));
        assert_eq!(w[4].1, b.mul(&a));
    }

    #[test]
    fn count_to_length_four() {
        let fam = [SquareMatrix::identity(2), SquareMatrix::identity(2)];
        assert_eq!(enumerate_words(&fam, 4).unwrap().count(), 30);
    }

    #[test]
    fn rejects_mismatch() {
        let fam = [SquareMatrix::identity(2), SquareMatrix::identity(3)];
        assert!(matches!(enumerate_words(&fam, 2), Err(Error::DimensionMismatch { .. })));
    }
}
