use std::process::ExitCode;

fn main() -> ExitCode {
    qrka::cli::run()
}
