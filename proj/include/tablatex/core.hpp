#pragma once

#include "tablatex/classify.hpp"
#include "tablatex/error.hpp"
#include "tablatex/merge.hpp"
#include "tablatex/normalize.hpp"
#include "tablatex/structure.hpp"
#include "tablatex/token.hpp"
#include "tablatex/tokenize.hpp"
#include "tablatex/vocabulary.hpp"
