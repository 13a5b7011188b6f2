use crate::budget::{Exhausted, WorkBudget};
use crate::error::{Error, Result};
use crate::metric::{Dataset, Metric, Point, PointId};
use crate::rng::{StreamId, StreamRng};

use super::tables::{Candidate, LshTables};
use super::LshParams;

/// An OR-of-ANDs bit-sampling index that owns its dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplifiedLshIndex {
    params: LshParams,
    ds: Dataset,
    tables: LshTables,
}

impl AmplifiedLshIndex {
    /// Samples the hash functions from `lp.seed` and hashes every live point.
    pub fn build(ds: Dataset, lp: LshParams) -> Result<Self> {
        if ds.metric() != Metric::Hamming {
            return Err(Error::ModeMismatch("LSH index requires a hamming dataset".into()));
        }
        if lp.k_concat == 0 || lp.l_tables == 0 {
            return Err(Error::InvalidParameter("k and L must be positive".into()));
        }
        let mut rng = StreamRng::new(lp.seed, StreamId::derive("setup", &[]));
        let mut tables = LshTables::sample(ds.dim(), lp.k_concat, lp.l_tables, &mut rng);
        tables.insert_all(&ds);
        Ok(Self { params: lp, ds, tables })
    }

    pub(crate) fn from_parts(params: LshParams, ds: Dataset, tables: LshTables) -> Self {
        Self { params, ds, tables }
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn dataset(&self) -> &Dataset {
        &self.ds
    }

    pub fn tables(&self) -> &LshTables {
        &self.tables
    }

    pub fn num_tables(&self) -> usize {
        self.tables.num_tables()
    }

    pub fn candidates(&self, q: &Point) -> Result<Vec<Candidate>> {
        self.ds.check(q)?;
        Ok(self.tables.candidates(q.as_bits().expect("hamming query")))
    }

    /// First candidate within `radius` in table-major, bucket order.
    pub fn classic_query(&self, q: &Point, radius: f64) -> Result<Option<PointId>> {
        self.ds.check(q)?;
        Ok(self
            .tables
            .scan(&self.ds, q, radius, &mut WorkBudget::unlimited())
            .expect("unlimited budget"))
    }

    /// [`classic_query`](Self::classic_query) charged against `budget`.
    pub fn classic_query_budgeted(
        &self,
        q: &Point,
        radius: f64,
        budget: &mut WorkBudget,
    ) -> Result<std::result::Result<Option<PointId>, Exhausted>> {
        self.ds.check(q)?;
        Ok(self.tables.scan(&self.ds, q, radius, budget))
    }

    pub fn insert(&mut self, p: Point) -> Result<PointId> {
        let id = self.ds.push(p)?;
        let b = self.ds.get(id).and_then(Point::as_bits).expect("just inserted");
        self.tables.insert(id, b);
        Ok(id)
    }

    pub fn delete(&mut self, id: PointId) -> Result<Point> {
        let p = self.ds.remove(id)?;
        let removed = self.tables.remove(id, p.as_bits().expect("hamming point"));
        debug_assert!(removed, "live point missing from a table");
        Ok(p)
    }
}
