use std::io::Write;

fn main() {
    let out = edlkit_cli::run(std::env::args_os());
    let text = serde_json::to_string_pretty(&out.output).expect("JSON value serializes");
    // a closed pipe is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    std::process::exit(out.code);
}
