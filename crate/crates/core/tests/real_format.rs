//! The C driver's real printer and `format_real` must agree byte for byte.

use emuc_core::codegen::{real_printer, STRICT_CFLAGS};
use emuc_core::harness::resolve_compiler;
use emuc_core::num::format_real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::process::{Command, Stdio};

const SAMPLES: usize = 100_000;

fn printer_program() -> String {
    format!(
        "#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\ntypedef char C_8;\ntypedef int I_32;\ntypedef double D_64;\ntypedef unsigned long long UI_64;\n{}\nint main(void) {{\n    C_8 line[64];\n    while (fgets(line, sizeof line, stdin) != NULL) {{\n        UI_64 bits = strtoull(line, NULL, 16);\n        D_64 x;\n        memcpy(&x, &bits, sizeof x);\n        emuc_put_real(x);\n        (void) fputc('\\n', stdout);\n    }}\n    return 0;\n}}\n",
        real_printer("D_64", "I_32")
    )
}

fn inputs() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut xs = vec![
        0.0,
        -0.0,
        0.1,
        0.1 + 0.2,
        1.0 / 3.0,
        10.0,
        1e-7,
        1.5e21,
        f64::MIN_POSITIVE,
        f64::MAX,
        f64::MIN,
        f64::EPSILON,
        5e-324,
        f64::NAN,
        f64::INFINITY,
        f64::NEG_INFINITY,
        // Exact binary values halfway between two shortest candidates.
        #[allow(clippy::excessive_precision)]
        1.25028228759765625,
        #[allow(clippy::excessive_precision)]
        212496493807852.125,
    ];
    while xs.len() < SAMPLES {
        let x = match xs.len() % 3 {
            0 => f64::from_bits(rng.gen()),
            // Values in the range pump displays live in, on a coarse grid.
            1 => (rng.gen_range(0..120_000) as f64) * 0.01,
            // Short binary fractions, which hit exact decimal ties.
            _ => (rng.gen_range(-1_000_000i64..1_000_000) as f64) / 2f64.powi(rng.gen_range(0..30)),
        };
        xs.push(x);
    }
    xs
}

#[test]
fn c_printer_matches_format_real() {
    let cc = resolve_compiler(None).expect("a C compiler is needed for this test");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("printer.c");
    let exe = dir.path().join("printer");
    std::fs::write(&src, printer_program()).unwrap();
    let out = Command::new(&cc.program)
        .args(&cc.args)
        .args(STRICT_CFLAGS)
        .arg(&src)
        .arg("-o")
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let xs = inputs();
    let mut stdin = String::new();
    for x in &xs {
        stdin.push_str(&format!("{:x}\n", x.to_bits()));
    }
    let mut child = Command::new(&exe)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || pipe.write_all(stdin.as_bytes()));
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), xs.len());
    let mismatches: Vec<_> = xs
        .iter()
        .zip(&lines)
        .filter(|(x, c)| format_real(**x) != **c)
        .take(5)
        .map(|(x, c)| format!("{:#x}: rust {} c {}", x.to_bits(), format_real(*x), c))
        .collect();
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}
