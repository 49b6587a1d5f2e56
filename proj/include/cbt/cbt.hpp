#ifndef CBT_CBT_HPP
#define CBT_CBT_HPP

#include "cbt/augment.hpp"
#include "cbt/classifier.hpp"
#include "cbt/corpus.hpp"
#include "cbt/correlation.hpp"
#include "cbt/error.hpp"
#include "cbt/label.hpp"
#include "cbt/ontology.hpp"
#include "cbt/pipeline.hpp"
#include "cbt/polarization.hpp"
#include "cbt/remote.hpp"
#include "cbt/report.hpp"
#include "cbt/synthetic.hpp"
#include "cbt/text.hpp"

#endif  // CBT_CBT_HPP
