#include <iostream>

#include <CLI11.hpp>

#include "fixture_corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regenerates the demonstration corpus used by the tests"};
  std::string out = "tests/fixtures/corpus";
  app.add_option("-o,--output", out, "output directory");
  CLI11_PARSE(app, argc, argv);
  try {
    creepdb::fixtures::write_fixture_corpus(out);
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote fixture corpus to " << out << "\n";
  return 0;
}
