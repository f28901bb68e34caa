#pragma once

#include "phishvis/bytevis.hpp"
#include "phishvis/classifier.hpp"
#include "phishvis/corpus.hpp"
#include "phishvis/dataset.hpp"
#include "phishvis/digest.hpp"
#include "phishvis/error.hpp"
#include "phishvis/fetcher.hpp"
#include "phishvis/hilbert.hpp"
#include "phishvis/metrics.hpp"
#include "phishvis/pipeline.hpp"
#include "phishvis/png.hpp"
#include "phishvis/store.hpp"
