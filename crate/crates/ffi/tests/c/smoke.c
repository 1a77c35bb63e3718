#include <stdio.h>
#include <string.h>
#include "treehom.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *m = th_last_error_message();                        \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, m ? m : ""); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

static const char *WTA =
    "wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }"
    "  prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q @ 1 }";
static const char *HOM =
    "hom { source { a/0 g/1 s/2 } target { a/0 g/1 d/3 }"
    "  rule a -> a  rule g -> g(x1)  rule s -> d(x2, g(x2), x1) }";

int main(void) {
  ThWtg *a = NULL;
  ThHom *h = NULL;
  ThVerdict *v = NULL;
  ThWtg *image = NULL;
  char *s = NULL;

  CHECK(th_wtg_parse(WTA, &a) == TH_STATUS_OK);
  CHECK(th_wtg_eval(a, "s(g(a), g(a))", &s) == TH_STATUS_OK);
  CHECK(strcmp(s, "4") == 0);
  th_string_free(s);

  CHECK(th_hom_parse(HOM, &h) == TH_STATUS_OK);
  CHECK(th_decide(a, h, true, 0, &v) == TH_STATUS_OK);
  CHECK(!th_verdict_is_regular(v));
  CHECK(th_verdict_render(v, &s) == TH_STATUS_OK);
  CHECK(strstr(s, "\"NONREGULAR\"") != NULL);
  th_string_free(s);

  CHECK(th_verdict_image(v, &image) == TH_STATUS_OK);
  CHECK(th_wtg_eval(image, "d(a, g(a), g(a))", &s) == TH_STATUS_OK);
  CHECK(strcmp(s, "2") == 0);
  th_string_free(s);

  CHECK(th_wtg_parse("wtg {", &image) == TH_STATUS_SYNTAX && image == NULL);
  CHECK(th_last_error_message() != NULL);

  th_wtg_free(image);
  th_verdict_free(v);
  th_hom_free(h);
  th_wtg_free(a);
  printf("ok %s\n", th_version());
  return 0;
}
