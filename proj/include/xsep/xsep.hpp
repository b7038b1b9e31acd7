// Copyright 2026 The xsep Authors
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

#include "xsep/commands.hpp"
#include "xsep/config.hpp"
#include "xsep/dictlearn.hpp"
#include "xsep/image.hpp"
#include "xsep/io.hpp"
#include "xsep/metrics.hpp"
#include "xsep/numerics.hpp"
#include "xsep/parallel.hpp"
#include "xsep/patching.hpp"
#include "xsep/separation.hpp"
#include "xsep/sparse.hpp"
#include "xsep/synth.hpp"
