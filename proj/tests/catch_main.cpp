// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.cpp>
