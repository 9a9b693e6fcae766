fn main() -> std::process::ExitCode {
    surface_lab::cli::main()
}
