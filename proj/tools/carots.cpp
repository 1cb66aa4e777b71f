#include "carots/cli/app.hpp"

int main(int argc, char** argv) { return carots::cli::run(argc, argv); }
