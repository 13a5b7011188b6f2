//! Versioned binary serialization of an [`AmplifiedLshIndex`].
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "RANNLSH1" | version u32
//! k u64 | L u64 | p1 f64 | p2 f64 | rho f64 | seed u64
//! dim u64 | id slots u64 | per slot: live u8 [, dim.div_ceil(64) words]
//! per table: k coordinates u32
//! per table: bucket count u64, buckets sorted by key:
//!     key words | id count u64 | ids u32
//! ```

use crate::error::{Error, Result};
use crate::metric::{BitVector, Dataset, Metric, Point, PointId};

use super::tables::{BucketMap, LshTables};
use super::{AmplifiedLshIndex, LshParams};

const MAGIC: &[u8; 8] = b"RANNLSH1";
const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::CorruptBlob(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        // every counted element occupies at least one byte
        if v as usize > self.buf.len() {
            return Err(Error::CorruptBlob(format!("implausible {what} count {v}")));
        }
        Ok(v as usize)
    }
}

impl AmplifiedLshIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        let p = self.params();
        w.u64(p.k_concat as u64);
        w.u64(p.l_tables as u64);
        w.f64(p.p1);
        w.f64(p.p2);
        w.f64(p.rho);
        w.u64(p.seed);

        let ds = self.dataset();
        w.u64(ds.dim() as u64);
        w.u64(ds.capacity_ids() as u64);
        for i in 0..ds.capacity_ids() {
            match ds.get(PointId(i as u32)) {
                Some(pt) => {
                    w.u8(1);
                    for &word in pt.as_bits().expect("hamming").words() {
                        w.u64(word);
                    }
                }
                None => w.u8(0),
            }
        }

        let t = self.tables();
        for i in 0..t.num_tables() {
            for &c in t.coords(i) {
                w.u32(c);
            }
        }
        for i in 0..t.num_tables() {
            let map = t.bucket_map(i);
            let mut keys: Vec<&Box<[u64]>> = map.keys().collect();
            keys.sort();
            w.u64(keys.len() as u64);
            for key in keys {
                for &word in key.iter() {
                    w.u64(word);
                }
                let ids = &map[key];
                w.u64(ids.len() as u64);
                for id in ids {
                    w.u32(id.0);
                }
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::CorruptBlob("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::CorruptBlob(format!("unsupported version {version}")));
        }
        let k = r.len("k")?;
        let l = r.len("L")?;
        let params = LshParams {
            k_concat: k,
            l_tables: l,
            p1: r.f64()?,
            p2: r.f64()?,
            rho: r.f64()?,
            seed: r.u64()?,
        };
        if k == 0 || l == 0 {
            return Err(Error::CorruptBlob("k and L must be positive".into()));
        }

        let dim = r.len("dim")?;
        if dim == 0 {
            return Err(Error::CorruptBlob("zero dimension".into()));
        }
        let words = dim.div_ceil(64);
        let n_slots = r.len("slot")?;
        let mut slots = Vec::with_capacity(n_slots);
        for _ in 0..n_slots {
            match r.u8()? {
                0 => slots.push(None),
                1 => {
                    let mut bits = Vec::with_capacity(dim);
                    let ws: Vec<u64> = (0..words).map(|_| r.u64()).collect::<Result<_>>()?;
                    for i in 0..dim {
                        bits.push(((ws[i / 64] >> (i % 64)) & 1) as u8);
                    }
                    let bv = BitVector::from_bits(&bits)?;
                    if bv.words() != ws.as_slice() {
                        return Err(Error::CorruptBlob("padding bits set in point".into()));
                    }
                    slots.push(Some(Point::Bits(bv)));
                }
                b => return Err(Error::CorruptBlob(format!("bad liveness byte {b}"))),
            }
        }
        let ds = Dataset::from_slots(Metric::Hamming, dim, slots).map_err(|e| Error::CorruptBlob(e.to_string()))?;

        let mut coords = Vec::with_capacity(l);
        for _ in 0..l {
            let c: Vec<u32> = (0..k).map(|_| r.u32()).collect::<Result<_>>()?;
            if c.iter().any(|&x| x as usize >= dim) {
                return Err(Error::CorruptBlob("coordinate out of range".into()));
            }
            coords.push(c);
        }
        let key_words = k.div_ceil(64).max(1);
        let mut buckets = Vec::with_capacity(l);
        for _ in 0..l {
            let nb = r.len("bucket")?;
            let mut map = BucketMap::default();
            for _ in 0..nb {
                let key: Vec<u64> = (0..key_words).map(|_| r.u64()).collect::<Result<_>>()?;
                let ni = r.len("id")?;
                let ids: Vec<PointId> = (0..ni).map(|_| r.u32().map(PointId)).collect::<Result<_>>()?;
                if ids.iter().any(|&id| !ds.contains(id)) {
                    return Err(Error::CorruptBlob("bucket references a dead id".into()));
                }
                if map.insert(key.into_boxed_slice(), ids).is_some() {
                    return Err(Error::CorruptBlob("duplicate bucket key".into()));
                }
            }
            buckets.push(map);
        }
        if r.pos != bytes.len() {
            return Err(Error::CorruptBlob("trailing bytes".into()));
        }
        let tables = LshTables::from_parts(dim, k, coords, buckets);
        // Buckets must agree with the stored points.
        let mut rebuilt = LshTables::from_parts(
            dim,
            k,
            (0..l).map(|i| tables.coords(i).to_vec()).collect(),
            (0..l).map(|_| BucketMap::default()).collect(),
        );
        rebuilt.insert_all(&ds);
        for i in 0..l {
            let a = tables.bucket_map(i);
            let b = rebuilt.bucket_map(i);
            let same = a.len() == b.len()
                && a.iter().all(|(key, ids)| {
                    b.get(key).is_some_and(|other| {
                        let mut x = ids.clone();
                        let mut y = other.clone();
                        x.sort();
                        y.sort();
                        x == y
                    })
                });
            if !same {
                return Err(Error::CorruptBlob(format!("table {i} does not match stored points")));
            }
        }
        Ok(AmplifiedLshIndex::from_parts(params, ds, tables))
    }
}
