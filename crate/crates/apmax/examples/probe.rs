use apmax::apscan::{max_u, max_w, max_u_naive, max_w_naive};
use apmax::rngword::{generate_word, StreamSeed};
use std::time::Instant;

fn main() {
    for n in [1024usize, 4096, 16384] {
        let words: Vec<_> = (0..8u64).map(|t| generate_word(StreamSeed::new(3, t), n)).collect();
        let t0 = Instant::now();
        let mut acc = 0usize;
        for w in &words { acc += max_w(w).value; }
        let dw = t0.elapsed() / 8;
        let t0 = Instant::now();
        for w in &words { acc += max_u(w).value; }
        let du = t0.elapsed() / 8;
        println!("n={n}: max_w {dw:?}/word  max_u {du:?}/word  (acc {acc})");
    }
    // naive timing at 1024 for criterion 1 budgeting
    let w = generate_word(StreamSeed::new(3, 0), 1024);
    let t0 = Instant::now();
    let a = max_w_naive(&w).unwrap();
    let b = max_u_naive(&w).unwrap();
    println!("naive at 1024: {:?} (W={} U={})", t0.elapsed(), a.value, b.value);
}
