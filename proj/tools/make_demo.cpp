#include <iostream>

#include <CLI11.hpp>

#include "credscore/demo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Writes the synthetic demo fixture"};
  std::string dir;
  credscore::demo::DemoOptions opt;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--seed", opt.seed, "generator seed");
  app.add_option("--posts", opt.posts, "number of posts");
  app.add_option("--advisors", opt.advisors, "number of advisors");
  CLI11_PARSE(app, argc, argv);
  try {
    credscore::demo::write_fixture(credscore::demo::make_fixture(opt), dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote demo fixture to " << dir << "\n";
  return 0;
}
