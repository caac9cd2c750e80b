// Copyright 2026 The logrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/config.hpp"
#include "logrank/explain.hpp"
#include "logrank/ingest.hpp"
#include "logrank/oracle.hpp"
#include "logrank/pipeline.hpp"
#include "logrank/rankstats.hpp"
#include "logrank/reader.hpp"
#include "logrank/recommend.hpp"
#include "logrank/report_io.hpp"
#include "logrank/synthgen.hpp"
