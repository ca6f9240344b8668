import csv
import io
import json
import logging

from rest_framework.renderers import BaseRenderer, JSONRenderer

logger = logging.getLogger(__name__)


class RunRecordJSONRenderer(JSONRenderer):
    """
    Two-space indented JSON with compact separators and one trailing newline.
    The bytes are the same under every rest_framework release.
    """
    separators = (",", ":")

    def render(self, data, accepted_media_type=None, renderer_context=None):
        if data is None:
            return b""
        indent = (renderer_context or {}).get("indent", 2)
        text = json.dumps(data, cls=self.encoder_class, indent=indent, separators=self.separators,
                          ensure_ascii=self.ensure_ascii, allow_nan=not self.strict)
        return text.encode(self.charset or "utf-8") + b"\n"


class PlotDataCSVRenderer(BaseRenderer):
    """
    ``order,partial_sum`` rows of a run record, preceded by a comment line with
    the target energy when one is known.
    """
    media_type = "text/csv"
    format = "csv"
    charset = "utf-8"

    def render(self, data, accepted_media_type=None, renderer_context=None):
        target = (renderer_context or {}).get("target")
        out = io.StringIO()
        if target is not None:
            out.write(f"# target={target}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["order", "partial_sum"])
        for order, value in enumerate((data or {}).get("partial_sums") or [], start=1):
            writer.writerow([order, value])
        return out.getvalue().encode(self.charset)


class RunRecordTextRenderer(BaseRenderer):
    media_type = "text/plain"
    format = "text"
    charset = "utf-8"

    def render(self, data, accepted_media_type=None, renderer_context=None):
        width = (renderer_context or {}).get("width", 24)
        lines = [
            f"potential: {data['potential']}",
            f"N={data['N']} l={data['l']} state={data['state']} mass={data['mass']} "
            f"order={data['order']} digits={data['digits']}",
            f"rho0:      {_short(data['rho0'], width)}",
            f"k*E(-2):   {_short(data['partial_sums'][0], width) if data['partial_sums'] else '-'}",
            "",
            f"{'order':>5}  {'partial sum':<{width + 6}}" + ("  shanks" if data.get("shanks") else ""),
        ]
        shanks = data.get("shanks") or []
        for order, value in enumerate(data["partial_sums"], start=1):
            line = f"{order:>5}  {_short(value, width):<{width + 6}}"
            if shanks:
                s = shanks[order - 1]
                line += f"  {_short(s, width) if s is not None else '-'}"
            lines.append(line.rstrip())
        lines.append("")
        lines.append(f"divergence onset: {data.get('divergence_order') or 'none'}")
        bracket = data.get("bracket")
        if bracket:
            lines.append(f"bracket: {_short(bracket['low'], width)} (order {bracket['order_low']}) - "
                         f"{_short(bracket['high'], width)} (order {bracket['order_high']})")
        if data.get("audit"):
            lines.append(f"agreeing digits: {data['audit']['agreeing_digits']}")
        if data.get("residual") is not None:
            lines.append(f"residual: {_short(data['residual'], 6)}")
        return ("\n".join(lines) + "\n").encode(self.charset)


class TableReportTextRenderer(BaseRenderer):
    media_type = "text/plain"
    format = "text"
    charset = "utf-8"

    def render(self, data, accepted_media_type=None, renderer_context=None):
        lines = [f"Table {data['table_id']}: {data['title']} (data v{data['version']}, {data['digits']} digits)", ""]
        for row in data["rows"]:
            flags = [row["provenance"]] + (["convention-adjusted"] if row["convention_adjusted"] else [])
            lines.append(f"{row['row_id']}: {row['potential']}  N={row['N']} l={row['l']} "
                         f"state={row['state']} mass={row['mass']}  [{', '.join(flags)}]")
            if row["error"]:
                lines.append(f"    FAIL  error {row['error']}")
            for outcome in row["outcomes"]:
                status = "ok  " if outcome["passed"] else "FAIL"
                lines.append(f"    {status}  {outcome['label']:<18} computed {outcome['computed'] or '-':<28} "
                             f"expected {outcome['expected']}"
                             + (f" +- {outcome['tolerance']}" if outcome["tolerance"] else ""))
        lines.append("")
        lines.append("all checks passed" if data["passed"] else "some checks FAILED")
        return ("\n".join(lines) + "\n").encode(self.charset)


RENDERERS = {
    "json": RunRecordJSONRenderer,
    "csv": PlotDataCSVRenderer,
    "text": RunRecordTextRenderer,
}


def _short(value: str | None, width: int) -> str:
    """Mantissa cut to ``width`` significant characters, exponent kept."""
    if value is None:
        return "-"
    mantissa, _, exponent = value.partition("e")
    if len(mantissa) > width:
        mantissa = mantissa[:width]
    return f"{mantissa}e{exponent}" if exponent else mantissa


def select_renderer(fmt: str) -> BaseRenderer:
    try:
        return RENDERERS[fmt]()
    except KeyError:
        raise ValueError(f"unknown output format {fmt!r}, expected one of {', '.join(RENDERERS)}") from None


def emit_plot_data(record: dict, target=None) -> str:
    """CSV plot data for a serialized run record; an empty record gives the header alone."""
    return PlotDataCSVRenderer().render(record, renderer_context={"target": target}).decode("utf-8")
