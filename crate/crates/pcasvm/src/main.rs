fn main() -> std::process::ExitCode {
    pcasvm::cli::main()
}
