// Copyright 2026 The Diachron Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "diachron/association.hpp"
#include "diachron/config.hpp"
#include "diachron/corpus.hpp"
#include "diachron/drift.hpp"
#include "diachron/embedding_io.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/pipeline.hpp"
#include "diachron/report.hpp"
#include "diachron/sgns.hpp"
#include "diachron/stats.hpp"
#include "diachron/synth.hpp"
#include "diachron/weat.hpp"
