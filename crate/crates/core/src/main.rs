fn main() {
    std::process::exit(sphere_frames::cli::main_with_args(std::env::args_os()));
}
