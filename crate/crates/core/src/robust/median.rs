use crate::error::{Error, Result};
use crate::metric::Point;
use crate::rng::StreamRng;
use crate::search::{Response, Searcher};

/// Runs `t` independent copies on `q` and reports the copy with the median charge.
///
/// Copy `j` gets the child stream `("median", j)` of `rng`.
pub fn median_amplify<S: Searcher>(copies: &mut [S], q: &Point, rng: &StreamRng) -> Result<Response> {
    let t = copies.len();
    if t == 0 || t.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "median needs an odd number of copies, got {t}"
        )));
    }
    let mut runs = copies
        .iter_mut()
        .enumerate()
        .map(|(j, s)| s.query(q, &mut rng.fork("median", j as u64)).map(|r| (j, r)))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by_key(|&(j, r)| (r.charge, j));
    Ok(runs[t / 2].1)
}
