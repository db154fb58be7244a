use clap::Parser;

fn main() {
    let cli = rsf::cli::Cli::parse();
    match rsf::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        // Reader went away (e.g. piped into head).
        Err(rsf::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            std::process::exit(0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
