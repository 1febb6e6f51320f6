fn main() -> std::process::ExitCode {
    adaptifont::cli::run()
}
