//! wasm-bindgen entry points for `www/index.html`. Every operation returns a
//! square `Frame` of small integers that the page paints onto a canvas.

use sandlab::growth::{divisible_sandpile, relax_point_mass};
use sandlab::rotor::{rotor_aggregate, RotorInit};
use sandlab::{algebra, graphcore};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Frame {
    side: usize,
    max: u8,
    cells: Vec<u8>,
    note: String,
}

#[wasm_bindgen]
impl Frame {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Largest value a cell can take.
    #[wasm_bindgen(getter)]
    pub fn max(&self) -> u8 {
        self.max
    }

    /// Row-major cells, top row first (largest second coordinate).
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        self.cells.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn note(&self) -> String {
        self.note.clone()
    }
}

impl Frame {
    fn from_fn(r: i64, max: u8, note: String, f: impl Fn(i64, i64) -> u8) -> Frame {
        let side = (2 * r + 1) as usize;
        let mut cells = Vec::with_capacity(side * side);
        for y in (-r..=r).rev() {
            for x in -r..=r {
                cells.push(f(x, y));
            }
        }
        Frame { side, max, cells, note }
    }

    fn from_sites(sites: &[Vec<i64>], note: String) -> Frame {
        let r = sites.iter().flat_map(|x| x.iter().map(|c| c.abs())).max().unwrap_or(0);
        let set: std::collections::HashSet<(i64, i64)> = sites.iter().map(|x| (x[0], x[1])).collect();
        Frame::from_fn(r, 1, note, |x, y| set.contains(&(x, y)) as u8)
    }
}

fn err(e: sandlab::SandlabError) -> JsError {
    JsError::new(&e.to_string())
}

/// Identity of the sandpile group of the (2n+1)² box.
#[wasm_bindgen]
pub fn identity(n: i64) -> Result<Frame, JsError> {
    if !(0..=60).contains(&n) {
        return Err(JsError::new("n must lie in 0..=60"));
    }
    let g = graphcore::box_graph(2, n);
    let id = algebra::group_identity(&g).map_err(err)?;
    let mass: i64 = id.iter().sum();
    Ok(Frame::from_fn(n, 3, format!("identity of Box({n}), mass {mass}"), |x, y| {
        id[g.vertex_at(&[x, y]).expect("inside box")] as u8
    }))
}

/// Stabilization of `chips` at the origin of Z² on constant background `h`.
#[wasm_bindgen]
pub fn point_source(chips: u32, h: i64) -> Result<Frame, JsError> {
    if chips > 2_000_000 {
        return Err(JsError::new("at most 2000000 chips"));
    }
    let r = relax_point_mass(chips as u64, h, 2).map_err(err)?;
    let visited = r.visited_sites().len();
    let w = r.window;
    Ok(Frame::from_fn(w, 3, format!("{chips} chips on background {h}: {visited} sites toppled"), |x, y| {
        r.height(&[x, y]).clamp(0, 3) as u8
    }))
}

/// Occupied set of rotor-router aggregation (`divisible` false) or the divisible sandpile with the same mass.
#[wasm_bindgen]
pub fn aggregate(n: u32, divisible: bool) -> Result<Frame, JsError> {
    if n == 0 || n > 200_000 {
        return Err(JsError::new("n must lie in 1..=200000"));
    }
    if divisible {
        let d = divisible_sandpile(n as f64, 2, 1e-6).map_err(err)?;
        Ok(Frame::from_sites(&d.occupied, format!("divisible sandpile, mass {n}, {} sites", d.occupied.len())))
    } else {
        let a = rotor_aggregate(n as u64, RotorInit::Uniform(0), 2).map_err(err)?;
        Ok(Frame::from_sites(&a.occupied, format!("rotor-router aggregate of {n} particles")))
    }
}
