use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("DEGEX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("degex: cannot size thread pool: {e}");
        }
    }
    let (code, text) = degex::cli::run(std::env::args_os());
    if code == 2 {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    ExitCode::from(code as u8)
}
