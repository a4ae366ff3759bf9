//! Writes a synthetic gamma-regression CSV to stdout.
//!
//! `cargo run -p gammareg-cli --example synthetic_data -- [n] [rho] [seed]`

use gammareg::simulation::{gen_design, gen_response};
use gammareg::RngStream;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(60, |s| s.parse().expect("n"));
    let rho: f64 = args.get(1).map_or(0.9, |s| s.parse().expect("rho"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed"));
    let beta = [0.5, 0.3, -0.2, 0.4];
    let mut rng = RngStream::new(seed, 0);
    let x = gen_design(&mut rng, n, beta.len(), rho).expect("design");
    let y = gen_response(&mut rng, &x, &beta, 0.25).expect("response");
    println!("x1,x2,x3,x4,y");
    for i in 0..n {
        let r = x.row(i);
        println!("{},{},{},{},{}", r[0], r[1], r[2], r[3], y[i]);
    }
}
