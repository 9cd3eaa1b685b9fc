System.out.println(Integer.parseInt("42") + 1);
