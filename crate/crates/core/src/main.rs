fn main() {
    std::process::exit(hda_core::io::cli::cli_main(std::env::args_os()));
}
