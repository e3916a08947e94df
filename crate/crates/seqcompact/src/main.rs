fn main() {
    std::process::exit(seqcompact::cli::main_with_args(std::env::args_os()));
}
