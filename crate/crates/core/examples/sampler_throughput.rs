//! Times Haar draws plus eigenangle extraction at a few sizes.

use std::time::Instant;

use symplectic_nlevel::haar::{eigenangles, eigenangles_fast, sample_usp_indexed};

fn main() {
    for &n in &[16usize, 32, 64, 128] {
        let reps = (20_000 / n).max(20);
        let t0 = Instant::now();
        let mut acc = 0.0;
        for i in 0..reps {
            let s = sample_usp_indexed(n, 1, i as u64).unwrap();
            acc += eigenangles_fast(&s).angles()[0];
        }
        let per = t0.elapsed().as_secs_f64() / reps as f64;
        let s = sample_usp_indexed(n, 7, 0).unwrap();
        let checked = eigenangles(&s).is_ok();
        println!(
            "N={n:4}  {:8.3} ms/sample  unitarity {:.1e}  symplectic {:.1e}  paired {checked}  ({acc:.3})",
            per * 1e3,
            s.unitarity_defect(),
            s.symplectic_defect()
        );
    }
}
