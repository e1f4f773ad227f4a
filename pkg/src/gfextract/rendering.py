import os

import jinja2

from gfextract.utils import ordinal_format

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")


def setup_template_environment() -> jinja2.Environment:
    template_env = jinja2.Environment(
        loader=jinja2.FileSystemLoader(TEMPLATE_DIR),
        undefined=jinja2.StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )

    def number_format(value):
        return f"{value:,}"

    def bit_position(value):
        if value == 0:
            return "LSB"
        return ordinal_format(value + 1) + " bit"

    template_env.filters["number"] = number_format
    template_env.filters["ordinal"] = ordinal_format
    template_env.filters["bit_position"] = bit_position

    return template_env


_template_env = setup_template_environment()


def render_template(name: str, *args, **kwargs) -> str:
    """
    Render one of the bundled text templates using the Jinja2 template engine.
    """
    return _template_env.get_template(name).render(*args, **kwargs)
