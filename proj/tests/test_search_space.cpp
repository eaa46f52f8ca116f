// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rasda/search_space.hpp"

using namespace rasda;

TEST_CASE("param spec invariants") {
  CHECK_THROWS(ParamSpec{"lr", LogFloatRange{0.0, 1.0}}.validate());
  CHECK_THROWS(ParamSpec{"lr", LogFloatRange{1.0, 1.0}}.validate());
  CHECK_THROWS(ParamSpec{"x", FloatRange{2.0, 1.0}}.validate());
  CHECK_THROWS(ParamSpec{"k", IntChoice{{}}}.validate());
  CHECK_THROWS(ParamSpec{"k", IntChoice{{3, 3}}}.validate());
  CHECK_THROWS(ParamSpec{"opt", Categorical{{"sgd", "sgd"}}}.validate());
  CHECK_NOTHROW(ParamSpec{"lr", LogFloatRange{1e-5, 1.0}}.validate());
}

TEST_CASE("sampling stays inside the domain") {
  std::vector<ParamSpec> space{
      {"lr", LogFloatRange{1e-5, 1.0}},
      {"x", FloatRange{-2.0, 3.0}},
      {"k", IntChoice{{5, 7, 9}}},
      {"opt", Categorical{{"sgd", "adam"}}},
  };
  SplitMix64 rng(123);
  bool saw_sgd = false, saw_adam = false;
  for (int i = 0; i < 10000; ++i) {
    Configuration cfg = sample_configuration(space, rng);
    REQUIRE_NOTHROW(validate_configuration(space, cfg));
    double lr = cfg.number("lr");
    REQUIRE(lr >= 1e-5);
    REQUIRE(lr <= 1.0);
    double x = cfg.number("x");
    REQUIRE(x >= -2.0);
    REQUIRE(x <= 3.0);
    std::int64_t k = cfg.integer("k");
    REQUIRE((k == 5 || k == 7 || k == 9));
    saw_sgd |= cfg.str("opt") == "sgd";
    saw_adam |= cfg.str("opt") == "adam";
  }
  CHECK(saw_sgd);
  CHECK(saw_adam);
}

TEST_CASE("log-uniform sampling has a flat exponent histogram") {
  std::vector<ParamSpec> space{{"lr", LogFloatRange{1e-5, 1.0}}};
  SplitMix64 rng(99);
  int bins[5] = {0, 0, 0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    double lr = sample_configuration(space, rng).number("lr");
    int bin = static_cast<int>(std::floor(std::log10(lr) + 5.0));
    bin = std::clamp(bin, 0, 4);
    ++bins[bin];
  }
  double expected = n / 5.0;
  double chi2 = 0;
  for (int b : bins) chi2 += (b - expected) * (b - expected) / expected;
  // df = 4; 20.0 is past the 0.9995 quantile, so a flat histogram passes
  // with a wide margin while a decade-skewed one fails by orders of
  // magnitude.
  CHECK(chi2 < 20.0);
}

TEST_CASE("single choices are deterministic") {
  std::vector<ParamSpec> space{{"k", IntChoice{{7}}}};
  SplitMix64 rng(5);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_configuration(space, rng).integer("k") == 7);
}

TEST_CASE("sampling is reproducible from the rng state") {
  std::vector<ParamSpec> space{
      {"lr", LogFloatRange{1e-5, 1.0}},
      {"opt", Categorical{{"sgd", "adam"}}},
  };
  SplitMix64 a(7777), b(7777);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_configuration(space, a).canonical() ==
          sample_configuration(space, b).canonical());
}

TEST_CASE("canonical form and stable hash") {
  // FNV-1a reference vectors.
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);

  Configuration cfg;
  cfg.values["lr"] = 0.1;
  cfg.values["opt"] = std::string("sgd");
  cfg.values["k"] = std::int64_t{7};
  CHECK(cfg.canonical() == "k=7;lr=0.1;opt=sgd;");
  CHECK(config_hash(cfg) == fnv1a("k=7;lr=0.1;opt=sgd;"));
}

TEST_CASE("configuration validation rejects mismatches") {
  std::vector<ParamSpec> space{{"lr", LogFloatRange{1e-5, 1.0}}};
  Configuration missing;
  CHECK_THROWS(validate_configuration(space, missing));
  Configuration wrong;
  wrong.values["lr"] = 2.0;
  CHECK_THROWS(validate_configuration(space, wrong));
  Configuration extra;
  extra.values["lr"] = 0.1;
  extra.values["zzz"] = 1.0;
  CHECK_THROWS(validate_configuration(space, extra));
}
