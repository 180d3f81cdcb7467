#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "linecolor/io.hpp"

using namespace linecolor;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LINECOLOR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const std::string& file) { return std::string(LINECOLOR_DATA) + "/" + file; }

}  // namespace

TEST(Parse, BaseGraphUniform) {
  const auto inst = parse_instance(Json::parse(R"({"base_graph": [[0,1],[0,2],[0,3]], "lists": "uniform", "q": 7})"));
  EXPECT_EQ(inst.size(), 3);
  EXPECT_EQ(inst.q, 7);
  EXPECT_EQ(inst.beta, 4);
}

TEST(Parse, UniformFromBeta) {
  LoadOptions opt;
  opt.beta = 10;
  const auto inst = parse_instance(Json::parse(R"({"base_graph": [[0,1],[1,2],[2,3]]})"), opt);
  EXPECT_EQ(inst.q, 10 + 2 + 1);
  EXPECT_EQ(inst.beta, 10);
}

TEST(Parse, ExplicitListsAndOverride) {
  const auto inst = parse_instance(
      Json::parse(R"({"base_graph": [[0,1],[1,2]], "lists": [[1,2,3],[2,3]], "min_beta": 0})"));
  EXPECT_EQ(inst.q, 3);
  EXPECT_EQ(inst.lists[1], (std::vector<int>{2, 3}));
  LoadOptions opt;
  opt.q = 12;
  EXPECT_EQ(parse_instance(Json::parse(R"({"base_graph": [[0,1]], "lists": {"uniform": 4}})"), opt).q, 12);
}

TEST(Parse, Rejections) {
  for (const char* doc : {R"([1,2])", R"({"lists": "uniform", "q": 5})", R"({"base_graph": [[0,1,2]], "q": 5})",
                          R"({"base_graph": [[0,1]], "lists": "weird", "q": 5})", R"({"base_graph": [[0,1]]})",
                          R"({"base_graph": [[0,1],[1,2]], "q": 3})", R"({"graph": [[1],[0]]})",
                          R"({"base_graph": [[0,"x"]], "q": 5})"})
    EXPECT_THROW(parse_instance(Json::parse(doc)), ParseError) << doc;
  EXPECT_THROW(load_instance(data("malformed.json")), ParseError);
  EXPECT_THROW(load_instance(data("missing.json")), ParseError);
}

TEST(Parse, DataFilesLoad) {
  EXPECT_EQ(load_instance(data("triangle.json")).q, 1017);
  EXPECT_EQ(load_instance(data("c5.json")).size(), 5);
  LoadOptions loose;
  loose.min_beta = 0;
  EXPECT_EQ(load_instance(data("free_edge.json"), loose).beta, 0);
  EXPECT_EQ(load_instance(data("star_small.json")).q, 6);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("verify " + data("triangle.json")), 0);
  EXPECT_EQ(run_cli("verify " + data("path3_small.json") + " --beta 2"), 1);
  EXPECT_EQ(run_cli("verify " + data("malformed.json")), 2);
  EXPECT_EQ(run_cli("verify"), 2);
  EXPECT_EQ(run_cli("garland " + data("triangle.json") + " --cap-enum 1"), 3);
  EXPECT_EQ(run_cli("lemmas --seed 5 --trials 10"), 0);
}
