#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "sstlab/config.hpp"
#include "sstlab/error.hpp"

namespace sstlab {
namespace {

int error_line(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return -1;
}

TEST(Config, ParsesLineModelAndExperiment) {
  const ModelSpec m = parse_model(R"(# comment
[rates]
family = "geometric"
base = 1.0
ratio = 2.0

[experiment]
trials = 50
t_grid = [0.5,
          1.0]  # trailing comment
seed = 9
)");
  ASSERT_EQ(m.kind, ModelSpec::Kind::kLine);
  ASSERT_TRUE(m.rates.has_value());
  EXPECT_DOUBLE_EQ(m.rates->birth(3), 1.0);
  EXPECT_DOUBLE_EQ(m.rates->death(3), 2.0);
  EXPECT_DOUBLE_EQ(m.rates->death(-3), 1.0);
  EXPECT_DOUBLE_EQ(m.rates->birth(-3), 2.0);
  EXPECT_EQ(*m.experiment.trials, 50);
  EXPECT_EQ(*m.experiment.seed, 9u);
  EXPECT_EQ(*m.experiment.t_grid, (std::vector<double>{0.5, 1.0}));
}

TEST(Config, TableSemantics) {
  const ModelSpec m = parse_model(R"([rates]
family = "table"
lo = -1
births = [1.0, 2.0]
deaths = [3.0, 4.0]
)");
  EXPECT_EQ(m.rates->lo(), -1);
  EXPECT_EQ(m.rates->hi(), 1);
  EXPECT_DOUBLE_EQ(m.rates->birth(-1), 1.0);
  EXPECT_DOUBLE_EQ(m.rates->birth(0), 2.0);
  EXPECT_DOUBLE_EQ(m.rates->death(0), 3.0);
  EXPECT_DOUBLE_EQ(m.rates->death(1), 4.0);
}

TEST(Config, ParsesGraph) {
  const ModelSpec m = parse_model(R"([graph]
vertices = ["a", "b"]
edges = [["a", "b", 1.0, 2.0]]

[[graph.ray]]
attach = "a"
attach_out = 1.0
attach_in = 1.0
family = "exponential"
base = 2.0

[[graph.ray]]
attach = "a"
attach_out = 1.0
attach_in = 1.0
family = "exponential"
base = 2.0

[[graph.ray]]
attach = "b"
attach_out = 1.0
attach_in = 1.0
family = "exponential"
base = 2.0
)");
  ASSERT_EQ(m.kind, ModelSpec::Kind::kGraph);
  // b has degree 2 (a and its ray), so it folds into the third branch.
  EXPECT_EQ(m.graph->center_size(), 1);
  EXPECT_EQ(m.graph->branch_count(), 3);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[rates]\nfamily = \"geometric\"\nbase = 1.0\nratio = 2.0\nbogus = 1\n"),
            5);
  EXPECT_EQ(error_line("[rates]\nfamily = \"nope\"\n"), 2);
  EXPECT_EQ(error_line("[rates]\nfamily = \"geometric\"\nbase = \n"), 3);
  EXPECT_EQ(error_line("[rates]\nfamily = \"geometric\"\nbase = -1.0\nratio = 2.0\n"), 3);
  EXPECT_EQ(error_line("\n\n[rates\n"), 3);
  EXPECT_EQ(error_line("[rates]\nfamily = \"exponential\"\nbase = 2.0\nbase = 3.0\n"), 4);
  EXPECT_EQ(error_line("[rates]\nfamily = \"exponential\"\nbase = 2.0\n[experiment]\n"
                       "trials = 0\n"),
            5);
  EXPECT_EQ(error_line("[rates]\nfamily = \"table\"\nlo = 0\nbirths = [1.0]\n"
                       "deaths = [1.0, 2.0]\n"),
            5);
}

TEST(Config, MissingModelTable) {
  EXPECT_THROW(parse_model("[experiment]\ntrials = 3\n"), ConfigError);
}

}  // namespace
}  // namespace sstlab
