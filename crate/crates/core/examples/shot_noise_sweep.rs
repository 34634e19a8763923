//! Median reconstruction quality against photon budget.
//!
//! Each cell's quadratures carry variance of about N / (4 B) for N cells and B
//! photons per analyzer setting, so the density error only falls below the
//! signal once B is well above N^2.
//!
//!     cargo run --release --example shot_noise_sweep -- [nx] [seeds]

use wavetomo::{make_mode, reconstruct_dst, scan, score, CouplingConfig, GridSpec, ModeSpec, PsiTildeMode};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn main() -> wavetomo::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(64, |s| s.parse().expect("nx must be an integer"));
    let seeds: u64 = args.next().map_or(9, |s| s.parse().expect("seeds must be an integer"));

    let grid = GridSpec::new(n, n, 125e-6)?;
    let field = make_mode(&ModeSpec::gaussian(ModeSpec::default_waist(&grid)), grid)?;
    println!("{n}x{n} Gaussian, median over {seeds} seeds");
    println!("{:>12} {:>12} {:>12}", "photons", "R2", "fidelity");
    for exp in 3..=9 {
        let budget = 10u64.pow(exp);
        let (mut r2, mut fid) = (Vec::new(), Vec::new());
        for seed in 0..seeds {
            let records = scan(&field, &CouplingConfig::strong(), budget, seed)?;
            let q = score(&reconstruct_dst(&records, &grid, PsiTildeMode::SelfConsistent)?, &field)?;
            r2.push(q.r_square);
            fid.push(q.fidelity);
        }
        println!("{budget:>12} {:>12.4} {:>12.4}", median(r2), median(fid));
    }
    Ok(())
}
