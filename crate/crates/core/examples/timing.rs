use dcqo_core::circuit::{Circuit, CircuitMeta, Gate};
use dcqo_core::simulator::{run, run_sequential};
use std::time::Instant;

fn cd_layer(n: usize) -> Circuit {
    let mut g: Vec<Gate> = (0..n).map(|q| Gate::H { q }).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            g.push(Gate::Rzy { q0: i, q1: j, angle: 0.03 });
            g.push(Gate::Ryz { q0: i, q1: j, angle: 0.03 });
        }
    }
    Circuit::new(n, g, CircuitMeta::default()).unwrap()
}

fn main() {
    for n in [16usize, 18, 20] {
        let c = cd_layer(n);
        let n2q = (n * (n - 1)) as f64;
        let t = Instant::now();
        let a = run(&c).unwrap();
        let par = t.elapsed();
        let t = Instant::now();
        let b = run_sequential(&c).unwrap();
        let seq = t.elapsed();
        println!(
            "n={n}: par {:>8.2?} ({:.0} us/2q)  seq {:>8.2?} ({:.0} us/2q)  fidelity {}",
            par, par.as_secs_f64() * 1e6 / n2q,
            seq, seq.as_secs_f64() * 1e6 / n2q,
            a.fidelity(&b)
        );
    }
}
