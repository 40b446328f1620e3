fn main() {
    std::process::exit(genbern::cli::run(std::env::args_os()));
}
