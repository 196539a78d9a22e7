#include "dopfit_app.hpp"

int main(int argc, char** argv) { return dopfit::cli::run(argc, argv); }
